"""Concept and assertion terms for the two-sorted lattice description logic.

The language has two sorts of individuals (objects and features), one
incidence role ``I`` between them, and indexed families of box roles
(object-to-feature) and diamond roles (feature-to-object).  Concepts are
built from atomic names with binary meet/join and the indexed modal
operators; there is no top or bottom concept.

Everything here is hash-consed: constructing the same term twice returns
the same object, so equality is identity and sets/dicts over terms are
cheap.  All values are immutable and safe to share across threads.

Synthetic individuals follow the tableaux conventions:

* ``classifier`` names ``a_C`` / ``x_C`` carve out a concept's extent and
  intent in the saturated model;
* adjoint names ``bdia(b)`` (black diamond), ``dia(b)``, ``box(y)`` and
  ``bsq(y)`` (black square) are introduced by the adjunction rules.

Two spellings are identified at construction time: ``dia_i(a_C)`` is the
same value as ``a_{dia_i C}`` and ``box_i(x_C)`` the same as
``x_{box_i C}``.
"""

from __future__ import annotations

from dataclasses import dataclass

# ---------------------------------------------------------------------------
# Concepts
# ---------------------------------------------------------------------------

ATOM = "atom"
MEET = "meet"
JOIN = "join"
BOX = "box"
DIA = "dia"

_concepts: dict = {}


class Concept:
    """A hash-consed concept term. Construct via atom/meet/join/box/dia."""

    __slots__ = ("kind", "name", "left", "right", "index", "child",
                 "box_depth", "dia_depth", "box_prefix", "dia_prefix", "size",
                 "_subs", "_box_leading", "_dia_leading", "_str")

    def __init__(self, kind, name=None, left=None, right=None,
                 index=None, child=None):
        self.kind = kind
        self.name = name
        self.left = left
        self.right = right
        self.index = index
        self.child = child
        # box_depth/dia_depth: maximal operator nesting anywhere in the
        # tree; box_prefix/dia_prefix: length of the leading operator
        # chain at the root (what the classifier identifications peel).
        if kind == ATOM:
            self.box_depth = 0
            self.dia_depth = 0
            self.box_prefix = 0
            self.dia_prefix = 0
            self.size = 1
        elif kind in (MEET, JOIN):
            self.box_depth = max(left.box_depth, right.box_depth)
            self.dia_depth = max(left.dia_depth, right.dia_depth)
            self.box_prefix = 0
            self.dia_prefix = 0
            self.size = 1 + left.size + right.size
        elif kind == BOX:
            self.box_depth = child.box_depth + 1
            self.dia_depth = child.dia_depth
            self.box_prefix = child.box_prefix + 1
            self.dia_prefix = 0
            self.size = 1 + child.size
        else:
            self.box_depth = child.box_depth
            self.dia_depth = child.dia_depth + 1
            self.box_prefix = 0
            self.dia_prefix = child.dia_prefix + 1
            self.size = 1 + child.size
        self._subs = None
        self._box_leading = None
        self._dia_leading = None
        self._str = None

    def __repr__(self):
        return f"Concept({self})"

    def __str__(self):
        if self._str is None:
            self._str = _render(self, 0)
        return self._str


# Precedence levels for rendering: join < meet < modal/atom.
def _render(c: Concept, level: int) -> str:
    if c.kind == ATOM:
        return c.name
    if c.kind == JOIN:
        s = f"{_render(c.left, 1)} or {_render(c.right, 0)}"
        return f"({s})" if level > 0 else s
    if c.kind == MEET:
        s = f"{_render(c.left, 2)} and {_render(c.right, 1)}"
        return f"({s})" if level > 1 else s
    op = "box" if c.kind == BOX else "dia"
    return f"{op}{c.index} {_render(c.child, 2)}"


def _intern_concept(key, make):
    got = _concepts.get(key)
    if got is None:
        got = make()
        _concepts[key] = got
    return got


def atom(name: str) -> Concept:
    if not name:
        raise ValueError("atomic concept name must be nonempty")
    return _intern_concept((ATOM, name), lambda: Concept(ATOM, name=name))


def meet(left: Concept, right: Concept) -> Concept:
    return _intern_concept((MEET, id(left), id(right)),
                           lambda: Concept(MEET, left=left, right=right))


def join(left: Concept, right: Concept) -> Concept:
    return _intern_concept((JOIN, id(left), id(right)),
                           lambda: Concept(JOIN, left=left, right=right))


def box(index: int, child: Concept) -> Concept:
    return _intern_concept((BOX, index, id(child)),
                           lambda: Concept(BOX, index=index, child=child))


def dia(index: int, child: Concept) -> Concept:
    return _intern_concept((DIA, index, id(child)),
                           lambda: Concept(DIA, index=index, child=child))


def subconcepts(c: Concept) -> frozenset:
    """All subterms of c, including c itself."""
    if c._subs is None:
        if c.kind == ATOM:
            c._subs = frozenset((c,))
        elif c.kind in (MEET, JOIN):
            c._subs = subconcepts(c.left) | subconcepts(c.right) | {c}
        else:
            c._subs = subconcepts(c.child) | {c}
    return c._subs


def is_box_leading(c: Concept) -> bool:
    """Least fixed point: box-of-anything over atoms, closed under box,
    meet with anything, and join of two box-leading concepts."""
    if c._box_leading is None:
        if c.kind == ATOM:
            c._box_leading = False
        elif c.kind == BOX:
            c._box_leading = True
        elif c.kind == DIA:
            c._box_leading = False
        elif c.kind == MEET:
            c._box_leading = is_box_leading(c.left) or is_box_leading(c.right)
        else:
            c._box_leading = is_box_leading(c.left) and is_box_leading(c.right)
    return c._box_leading


def is_dia_leading(c: Concept) -> bool:
    """Dual of is_box_leading: closed under diamond, join with anything,
    and meet of two diamond-leading concepts."""
    if c._dia_leading is None:
        if c.kind == ATOM:
            c._dia_leading = False
        elif c.kind == DIA:
            c._dia_leading = True
        elif c.kind == BOX:
            c._dia_leading = False
        elif c.kind == JOIN:
            c._dia_leading = is_dia_leading(c.left) or is_dia_leading(c.right)
        else:
            c._dia_leading = is_dia_leading(c.left) and is_dia_leading(c.right)
    return c._dia_leading


# ---------------------------------------------------------------------------
# Individuals
# ---------------------------------------------------------------------------

OBJ = "obj"
FEAT = "feat"

NAMED = "named"
CLASSIFIER = "classifier"
BLACK_DIA = "bdia"   # left adjoint of box, applied to an object
ADJ_DIA = "dia"      # diamond image of an object
ADJ_BOX = "box"      # box image of a feature
BLACK_SQ = "bsq"     # right adjoint of diamond, applied to a feature
PAD = "pad"          # isolated carrier element keeping empty sections stable

_individuals: dict = {}


class Individual:
    """A hash-consed individual name (object or feature).

    ``box_depth``/``dia_depth`` implement the bookkeeping used by the
    termination bounds: named individuals sit at (0, 0); the classifier
    of C sits at (0, -dia_prefix(C)) on the object side and
    (-box_prefix(C), 0) on the feature side; each adjoint constructor
    shifts one counter by one in the direction of its rule.  Prefix
    counts (rather than full nesting depths) are the offsets under which
    the membership-depth bounds survive meet/join decomposition while
    the classifier identifications stay depth-consistent.
    """

    __slots__ = ("kind", "sort", "name", "concept", "index", "base",
                 "box_depth", "dia_depth", "_str")

    def __init__(self, kind, sort, name=None, concept=None,
                 index=None, base=None):
        self.kind = kind
        self.sort = sort
        self.name = name
        self.concept = concept
        self.index = index
        self.base = base
        if kind == NAMED:
            self.box_depth = 0
            self.dia_depth = 0
        elif kind == CLASSIFIER:
            if sort == OBJ:
                self.box_depth = 0
                self.dia_depth = -concept.dia_prefix
            else:
                self.box_depth = -concept.box_prefix
                self.dia_depth = 0
        elif kind == PAD:
            self.box_depth = 0
            self.dia_depth = 0
        elif kind == BLACK_DIA:
            self.box_depth = base.box_depth + 1
            self.dia_depth = base.dia_depth
        elif kind == ADJ_DIA:
            self.box_depth = base.box_depth
            self.dia_depth = base.dia_depth - 1
        elif kind == ADJ_BOX:
            self.box_depth = base.box_depth - 1
            self.dia_depth = base.dia_depth
        else:  # BLACK_SQ
            self.box_depth = base.box_depth
            self.dia_depth = base.dia_depth + 1
        self._str = None

    @property
    def is_synthetic(self) -> bool:
        return self.kind != NAMED

    def __repr__(self):
        return f"Individual({self})"

    def __str__(self):
        if self._str is None:
            if self.kind == NAMED:
                self._str = self.name
            elif self.kind == CLASSIFIER:
                tag = "a" if self.sort == OBJ else "x"
                self._str = f"{tag}[{self.concept}]"
            elif self.kind == PAD:
                self._str = "a[top]" if self.sort == OBJ else "x[bot]"
            else:
                self._str = f"{self.kind}{self.index}({self.base})"
        return self._str


def _intern_ind(key, make):
    got = _individuals.get(key)
    if got is None:
        got = make()
        _individuals[key] = got
    return got


def named(sort: str, name: str) -> Individual:
    if not name:
        raise ValueError("individual name must be nonempty")
    return _intern_ind((NAMED, sort, name),
                       lambda: Individual(NAMED, sort, name=name))


def named_obj(name: str) -> Individual:
    return named(OBJ, name)


def named_feat(name: str) -> Individual:
    return named(FEAT, name)


def classifier_obj(c: Concept) -> Individual:
    """The classifying object a_C."""
    return _intern_ind((CLASSIFIER, OBJ, id(c)),
                       lambda: Individual(CLASSIFIER, OBJ, concept=c))


def classifier_feat(c: Concept) -> Individual:
    """The classifying feature x_C."""
    return _intern_ind((CLASSIFIER, FEAT, id(c)),
                       lambda: Individual(CLASSIFIER, FEAT, concept=c))


def pad_obj() -> Individual:
    """The isolated padding object (the bottom row of incidence tables)."""
    return _intern_ind((PAD, OBJ), lambda: Individual(PAD, OBJ))


def pad_feat() -> Individual:
    """The isolated padding feature."""
    return _intern_ind((PAD, FEAT), lambda: Individual(PAD, FEAT))


def black_diamond(b: Individual, index: int) -> Individual:
    if b.sort != OBJ:
        raise ValueError("black diamond applies to objects")
    return _intern_ind((BLACK_DIA, index, id(b)),
                       lambda: Individual(BLACK_DIA, OBJ, index=index, base=b))


def adj_diamond(b: Individual, index: int) -> Individual:
    """dia_i(b); collapses to the classifier of dia_i C when b is a_C."""
    if b.sort != OBJ:
        raise ValueError("diamond image applies to objects")
    if b.kind == CLASSIFIER:
        return classifier_obj(dia(index, b.concept))
    return _intern_ind((ADJ_DIA, index, id(b)),
                       lambda: Individual(ADJ_DIA, OBJ, index=index, base=b))


def adj_box(y: Individual, index: int) -> Individual:
    """box_i(y); collapses to the classifier of box_i C when y is x_C."""
    if y.sort != FEAT:
        raise ValueError("box image applies to features")
    if y.kind == CLASSIFIER:
        return classifier_feat(box(index, y.concept))
    return _intern_ind((ADJ_BOX, index, id(y)),
                       lambda: Individual(ADJ_BOX, FEAT, index=index, base=y))


def black_square(y: Individual, index: int) -> Individual:
    if y.sort != FEAT:
        raise ValueError("black square applies to features")
    return _intern_ind((BLACK_SQ, index, id(y)),
                       lambda: Individual(BLACK_SQ, FEAT, index=index, base=y))


def dia_adjoint_view(b: Individual):
    """(index, base) when the object b is a diamond image, else None.

    Covers both the explicit dia_i(b) spelling and the identified
    classifier spelling a_{dia_i C} = dia_i(a_C).
    """
    if b.kind == ADJ_DIA:
        return b.index, b.base
    if b.kind == CLASSIFIER and b.concept.kind == DIA:
        return b.concept.index, classifier_obj(b.concept.child)
    return None


def box_adjoint_view(y: Individual):
    """(index, base) when the feature y is a box image, else None."""
    if y.kind == ADJ_BOX:
        return y.index, y.base
    if y.kind == CLASSIFIER and y.concept.kind == BOX:
        return y.concept.index, classifier_feat(y.concept.child)
    return None


# ---------------------------------------------------------------------------
# Roles (query-level handle on a relation family)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Role:
    """A relation name: the incidence relation I, or an indexed box/dia role."""

    kind: str           # "I" | "box" | "dia"
    index: int | None = None

    def __post_init__(self):
        if self.kind == "I":
            if self.index is not None:
                raise ValueError("the incidence role carries no index")
        elif self.kind in ("box", "dia"):
            if not isinstance(self.index, int) or self.index < 1:
                raise ValueError("role indices are integers starting at 1")
        else:
            raise ValueError(f"unknown role kind {self.kind!r}")

    def __str__(self):
        if self.kind == "I":
            return "I"
        return ("Rbox" if self.kind == "box" else "Rdia") + str(self.index)

    @classmethod
    def parse(cls, text: str) -> "Role":
        if text == "I":
            return cls("I")
        for prefix, kind in (("Rbox", "box"), ("Rdia", "dia")):
            if text.startswith(prefix) and text[len(prefix):].isdigit():
                return cls(kind, int(text[len(prefix):]))
        raise ValueError(f"not a role name: {text!r}")


# ---------------------------------------------------------------------------
# Assertions
# ---------------------------------------------------------------------------

REL_I = "I"
REL_BOX = "rbox"
REL_DIA = "rdia"
MEM_OBJ = "mobj"
MEM_FEAT = "mfeat"
NEG = "neg"

RELATIONAL_KINDS = (REL_I, REL_BOX, REL_DIA)

_assertions: dict = {}


class Assertion:
    """A hash-consed ABox term.

    Positive kinds: ``b I y``, ``b Rbox_i y``, ``y Rdia_i b``, ``b : C``,
    ``y :: C``.  ``neg`` wraps exactly one positive term.
    """

    __slots__ = ("kind", "left", "right", "index", "ind", "concept",
                 "inner", "_str")

    def __init__(self, kind, left=None, right=None, index=None,
                 ind=None, concept=None, inner=None):
        self.kind = kind
        self.left = left
        self.right = right
        self.index = index
        self.ind = ind
        self.concept = concept
        self.inner = inner
        self._str = None

    @property
    def is_relational(self) -> bool:
        return self.kind in RELATIONAL_KINDS

    @property
    def is_negative(self) -> bool:
        return self.kind == NEG

    def individuals(self):
        if self.kind == NEG:
            return self.inner.individuals()
        if self.kind in RELATIONAL_KINDS:
            return (self.left, self.right)
        return (self.ind,)

    def __repr__(self):
        return f"Assertion({self})"

    def __str__(self):
        if self._str is None:
            if self.kind == REL_I:
                self._str = f"{self.left} I {self.right}"
            elif self.kind == REL_BOX:
                self._str = f"{self.left} Rbox{self.index} {self.right}"
            elif self.kind == REL_DIA:
                self._str = f"{self.left} Rdia{self.index} {self.right}"
            elif self.kind == MEM_OBJ:
                self._str = f"{self.ind} : {self.concept}"
            elif self.kind == MEM_FEAT:
                self._str = f"{self.ind} :: {self.concept}"
            else:
                self._str = f"not ({self.inner})"
        return self._str


def _intern_assertion(key, make):
    got = _assertions.get(key)
    if got is None:
        got = make()
        _assertions[key] = got
    return got


def rel_i(b: Individual, y: Individual) -> Assertion:
    if b.sort != OBJ or y.sort != FEAT:
        raise ValueError(f"incidence terms relate an object to a feature: {b} I {y}")
    return _intern_assertion((REL_I, id(b), id(y)),
                             lambda: Assertion(REL_I, left=b, right=y))


def rel_box(index: int, b: Individual, y: Individual) -> Assertion:
    if b.sort != OBJ or y.sort != FEAT:
        raise ValueError("box-role terms relate an object to a feature")
    return _intern_assertion((REL_BOX, index, id(b), id(y)),
                             lambda: Assertion(REL_BOX, left=b, right=y, index=index))


def rel_dia(index: int, y: Individual, b: Individual) -> Assertion:
    if y.sort != FEAT or b.sort != OBJ:
        raise ValueError("dia-role terms relate a feature to an object")
    return _intern_assertion((REL_DIA, index, id(y), id(b)),
                             lambda: Assertion(REL_DIA, left=y, right=b, index=index))


def member(ind: Individual, c: Concept) -> Assertion:
    """b : C for objects, y :: C for features."""
    kind = MEM_OBJ if ind.sort == OBJ else MEM_FEAT
    return _intern_assertion((kind, id(ind), id(c)),
                             lambda: Assertion(kind, ind=ind, concept=c))


def neg(a: Assertion) -> Assertion:
    if a.kind == NEG:
        raise ValueError("negation applies only to positive terms")
    return _intern_assertion((NEG, id(a)), lambda: Assertion(NEG, inner=a))


def rel(role: Role, left: Individual, right: Individual) -> Assertion:
    """Relational term for a role handle; argument order is (left, right)
    in the role's own reading direction."""
    if role.kind == "I":
        return rel_i(left, right)
    if role.kind == "box":
        return rel_box(role.index, left, right)
    return rel_dia(role.index, left, right)


# ---------------------------------------------------------------------------
# Depth profiles and ABox-level measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthProfile:
    box_depth: int
    dia_depth: int


def depth_profile(e) -> DepthProfile:
    """Depth bookkeeping of a concept or individual."""
    return DepthProfile(e.box_depth, e.dia_depth)


def membership_concepts(assertions) -> set:
    """Top-level concepts of all (possibly negated) membership terms."""
    out = set()
    for a in assertions:
        t = a.inner if a.kind == NEG else a
        if t.kind in (MEM_OBJ, MEM_FEAT):
            out.add(t.concept)
    return out


def occurring_concepts(assertions) -> frozenset:
    """Every concept occurring in the assertion set: subterm closure of
    the concepts in membership terms, positive or negated."""
    out = set()
    for c in membership_concepts(assertions):
        out |= subconcepts(c)
    return frozenset(out)


def occurs_in(c: Concept, assertions) -> bool:
    """True iff c occurs in the assertion set (as a membership subterm)."""
    return c in occurring_concepts(assertions)


def abox_depths(assertions) -> DepthProfile:
    """Componentwise maximum of depths over all occurring concepts."""
    bd = dd = 0
    for c in membership_concepts(assertions):
        bd = max(bd, c.box_depth)
        dd = max(dd, c.dia_depth)
    return DepthProfile(bd, dd)


def individuals_in(assertions) -> set:
    out = set()
    for a in assertions:
        out.update(a.individuals())
    return out
