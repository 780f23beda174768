"""Exception hierarchy shared by all polardl modules."""


class PolardlError(Exception):
    """Base class for every error raised by this package."""


class ParseError(PolardlError):
    """Syntax or sort error in a knowledge-base document.

    Carries 1-based line/column of the offending token.
    """

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class UndeclaredRoleError(ParseError):
    """A role index was used without a matching `roles` declaration."""


class SerializationError(PolardlError):
    """A knowledge base cannot be rendered in the surface syntax."""


class CycleError(PolardlError):
    """The definitional axioms contain a dependency cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cyclic definitions: " + " -> ".join(self.cycle))


class MultipleDefinitionError(PolardlError):
    """A concept name is defined by more than one axiom."""


class SizeLimitError(PolardlError):
    """Definition expansion exceeded the configured node budget."""


class ResourceLimitError(PolardlError):
    """Saturation exceeded the configured step budget."""


class ClashPresentError(PolardlError):
    """A model was requested from a completion that contains a clash."""


class UnknownAtomError(PolardlError):
    """A concept mentions an atom the model does not interpret."""


class UnknownNameError(PolardlError):
    """A query mentions an individual that does not occur in the ABox."""


class UnknownIndividualError(UnknownNameError):
    """An extra rule is instantiated with an individual absent from the ABox."""


class UnsupportedRuleError(PolardlError):
    """The requested rule direction has no terminating tableaux expansion."""


class UnsupportedQueryError(PolardlError):
    """The query falls outside the decidable fragment handled here."""


class BudgetExceededError(PolardlError):
    """Exhaustive search exceeded its configured budget."""
