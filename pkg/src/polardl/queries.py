"""Query answering over a knowledge base.

One saturation of the unraveled ABox is cached and answers every
positive relationship, membership and subsumption query by lookup: the
saturated set is a universal model for those, so ``b : C`` is entailed
exactly when ``b I x_C`` was derived, and ``C1 sub C2`` exactly when
``a_C1 I x_C2`` was derived.  Negative relational queries are answered
by scanning the input ABox, which is complete for them.  Everything
else (membership of concepts absent from the ABox, negative membership
and subsumption, separation, differentiation, identity) spawns an
isolated saturation seeded from the original ABox, never from the
cached completion, with creation terms or extra rules folded in.

Read-only queries against the cached completion may run concurrently;
each saturating query owns its own run.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (ClashPresentError, UnknownNameError,
                     UnsupportedQueryError)
from .parser import KnowledgeBase
from .tbox import (definition_map, replace_subtree, substitute_concept,
                   unravel)
from . import syntax as S
from . import tableaux as T
from .syntax import Role


@dataclass
class Answer:
    """A query result: a boolean or a sorted name list, plus an optional
    certificate (clash trace or witnessing facts)."""
    value: object
    certificate: dict | None = None


def _steps_payload(steps):
    return [{"rule": rule, "premises": [str(p) for p in premises],
             "added": str(conclusion)}
            for rule, premises, conclusion in steps]


class QueryEngine:
    """Answers queries against one knowledge base (or raw assertion set)."""

    def __init__(self, source, *, max_steps: int | None = None):
        if isinstance(source, KnowledgeBase):
            self.abox = unravel(source)
            self.box_roles = source.box_roles
            self.dia_roles = source.dia_roles
            self._defs = definition_map(source)
        else:
            self.abox = frozenset(source)
            self.box_roles = None
            self.dia_roles = None
            self._defs = {}
        self.max_steps = max_steps
        self.saturation_runs = 0
        self._base: T.Completion | None = None

    def _expand(self, c: S.Concept) -> S.Concept:
        """Replace defined names in a query concept by their definitions."""
        return substitute_concept(c, self._defs) if self._defs else c

    # -- plumbing ------------------------------------------------------------

    def _saturate(self, assertions, rules=T.BASE_RULES) -> T.Completion:
        self.saturation_runs += 1
        return T.saturate(assertions, rules, max_steps=self.max_steps)

    @property
    def completion(self) -> T.Completion:
        if self._base is None:
            self._base = self._saturate(self.abox)
        return self._base

    @property
    def is_consistent(self) -> bool:
        return self.completion.is_consistent

    def _require_consistent(self):
        if not self.completion.is_consistent:
            raise ClashPresentError(
                "queries are defined over a consistent knowledge base")

    def _known(self, ind: S.Individual):
        if ind not in self.completion.original_individuals():
            raise UnknownNameError(f"{ind} does not occur in the ABox")

    def _role_indices(self):
        if self.box_roles is not None:
            return (list(range(1, self.box_roles + 1)),
                    list(range(1, self.dia_roles + 1)))
        box_is, dia_is = set(), set()
        for a in self.abox:
            t = a.inner if a.kind == S.NEG else a
            if t.kind == S.REL_BOX:
                box_is.add(t.index)
            elif t.kind == S.REL_DIA:
                dia_is.add(t.index)
        for c in S.occurring_concepts(self.abox):
            if c.kind == S.BOX:
                box_is.add(c.index)
            elif c.kind == S.DIA:
                dia_is.add(c.index)
        return sorted(box_is), sorted(dia_is)

    def _completion_with_concepts(self, concepts) -> T.Completion:
        """The cached completion when every concept already occurs; else
        an isolated run seeded with the missing creation pairs."""
        self._require_consistent()
        missing = [c for c in concepts if c not in self.completion.occurring]
        if not missing:
            return self.completion
        seeds = set()
        for c in missing:
            a_c, x_c = T.fresh_names(c)
            seeds.add(S.member(a_c, c))
            seeds.add(S.member(x_c, c))
        run = self._saturate(self.abox | seeds)
        if not run.is_consistent:
            raise ClashPresentError(
                "creation terms clashed on a consistent ABox; "
                "this indicates an engine defect")
        return run

    # -- relationship queries --------------------------------------------------

    def ask_relational(self, lhs: S.Individual, role: Role,
                       rhs: S.Individual) -> Answer:
        """Is the relational fact entailed? Lookup in the completion."""
        self._require_consistent()
        self._known(lhs)
        self._known(rhs)
        fact = S.rel(role, lhs, rhs)
        present = fact in self.completion
        cert = {"kind": "facts", "facts": [str(fact)] if present else [],
                "absent": None if present else str(fact)}
        return Answer(present, cert)

    def list_related(self, anchor: S.Individual, role: Role,
                     side: str = "right", *,
                     include_synthetic: bool = False) -> Answer:
        """All individuals related to the anchor under the role, on the
        given side; original names only unless include_synthetic."""
        self._require_consistent()
        self._known(anchor)
        found = self.completion.related(role, anchor, side)
        if not include_synthetic:
            found = [i for i in found if not i.is_synthetic]
        names = sorted({str(i) for i in found})
        facts = [str(S.rel(role, anchor, i)) if side == "right"
                 else str(S.rel(role, i, anchor))
                 for i in found]
        return Answer(names, {"kind": "facts", "facts": sorted(facts)})

    # -- membership / subsumption ----------------------------------------------

    def ask_membership(self, ind: S.Individual, c: S.Concept) -> Answer:
        """Is the individual in the extent (intent) of the concept?
        Defined names in the concept are expanded first."""
        self._known(ind)
        c = self._expand(c)
        run = self._completion_with_concepts([c])
        a_c, x_c = T.fresh_names(c)
        fact = S.rel_i(ind, x_c) if ind.sort == S.OBJ else S.rel_i(a_c, ind)
        present = fact in run
        cert = {"kind": "facts", "facts": [str(fact)] if present else [],
                "absent": None if present else str(fact)}
        return Answer(present, cert)

    def list_members(self, c: S.Concept, side: str = "extent", *,
                     include_synthetic: bool = False) -> Answer:
        c = self._expand(c)
        run = self._completion_with_concepts([c])
        a_c, x_c = T.fresh_names(c)
        if side == "extent":
            found = run.related(Role("I"), x_c, "left")
        else:
            found = run.related(Role("I"), a_c, "right")
        if not include_synthetic:
            found = [i for i in found if not i.is_synthetic]
        if side == "extent":
            facts = sorted(str(S.rel_i(b, x_c)) for b in found)
        else:
            facts = sorted(str(S.rel_i(a_c, y)) for y in found)
        return Answer(sorted({str(i) for i in found}),
                      {"kind": "facts", "facts": facts})

    def ask_subsumption(self, c1: S.Concept, c2: S.Concept) -> Answer:
        """Is every instance of c1 an instance of c2?"""
        c1, c2 = self._expand(c1), self._expand(c2)
        run = self._completion_with_concepts([c1, c2])
        a_c1, _ = T.fresh_names(c1)
        _, x_c2 = T.fresh_names(c2)
        fact = S.rel_i(a_c1, x_c2)
        present = fact in run
        cert = {"kind": "facts", "facts": [str(fact)] if present else [],
                "absent": None if present else str(fact)}
        return Answer(present, cert)

    def ask_disjunctive(self, terms) -> Answer:
        """Disjunction of positive queries: true iff some disjunct is
        individually entailed."""
        answers = []
        for t in terms:
            if t.kind == S.NEG:
                raise UnsupportedQueryError(
                    "disjunctive queries take negation-free terms")
            if t.kind in (S.MEM_OBJ, S.MEM_FEAT):
                sub = self.ask_membership(t.ind, t.concept)
            elif t.kind == S.REL_I:
                sub = self.ask_relational(t.left, Role("I"), t.right)
            elif t.kind == S.REL_BOX:
                sub = self.ask_relational(t.left, Role("box", t.index), t.right)
            else:
                sub = self.ask_relational(t.left, Role("dia", t.index), t.right)
            answers.append((t, sub))
            if sub.value:
                return Answer(True, {"kind": "disjunct", "witness": str(t),
                                     "facts": sub.certificate["facts"]})
        return Answer(False, {"kind": "disjunct", "witness": None,
                              "failed": [str(t) for t, _ in answers]})

    # -- negative queries --------------------------------------------------------

    def ask_negative_relational(self, t: S.Assertion) -> Answer:
        """Entailment of the negation of a relational fact: a scan of the
        input ABox, no saturation."""
        self._require_consistent()
        if t.kind == S.NEG:
            t = t.inner
        if not t.is_relational:
            raise UnsupportedQueryError("expected a relational term")
        for ind in t.individuals():
            self._known(ind)
        hit = S.neg(t) in self.abox
        return Answer(hit, {"kind": "facts",
                            "facts": [str(S.neg(t))] if hit else [],
                            "absent": None if hit else str(S.neg(t))})

    def ask_negative_membership(self, ind: S.Individual,
                                c: S.Concept) -> Answer:
        """Entailed non-membership: add the membership and test
        consistency of the extension."""
        self._require_consistent()
        self._known(ind)
        run = self._saturate(self.abox | {S.member(ind, self._expand(c))})
        if run.is_consistent:
            return Answer(False, {"kind": "no-clash"})
        return Answer(True, {"kind": "clash",
                             "steps": _steps_payload(run.clash_certificate())})

    def ask_negative_subsumption(self, c1: S.Concept,
                                 c2: S.Concept) -> Answer:
        """Entailed non-subsumption: fold c1 sub c2 into the ABox by
        rewriting and unraveling, then test consistency.

        Supported only when no subformula of c1 appears in c2.
        """
        self._require_consistent()
        c1, c2 = self._expand(c1), self._expand(c2)
        if S.subconcepts(c1) & S.subconcepts(c2):
            raise UnsupportedQueryError(
                "negative subsumption needs c1 and c2 subformula-disjoint")
        taken = {s.name for s in (S.subconcepts(c1) | S.subconcepts(c2))
                 if s.kind == S.ATOM}
        taken |= {s.name for c in S.occurring_concepts(self.abox)
                  for s in S.subconcepts(c) if s.kind == S.ATOM}
        n = 1
        while f"G{n}" in taken:
            n += 1
        replacement = S.meet(c2, S.atom(f"G{n}"))
        rewritten = {self._replace_in_assertion(a, c1, replacement)
                     for a in self.abox}
        a_r, x_r = T.fresh_names(replacement)
        rewritten |= {S.member(a_r, replacement), S.member(x_r, replacement)}
        run = self._saturate(rewritten)
        if run.is_consistent:
            return Answer(False, {"kind": "no-clash"})
        return Answer(True, {"kind": "clash",
                             "steps": _steps_payload(run.clash_certificate())})

    @staticmethod
    def _replace_in_assertion(a, target, replacement):
        def fix_ind(ind):
            if ind.kind == S.CLASSIFIER:
                c = replace_subtree(ind.concept, target, replacement)
                return (S.classifier_obj(c) if ind.sort == S.OBJ
                        else S.classifier_feat(c))
            if ind.kind == S.NAMED:
                return ind
            ctor = {S.BLACK_DIA: S.black_diamond, S.ADJ_DIA: S.adj_diamond,
                    S.ADJ_BOX: S.adj_box, S.BLACK_SQ: S.black_square}[ind.kind]
            return ctor(fix_ind(ind.base), ind.index)

        if a.kind == S.NEG:
            return S.neg(QueryEngine._replace_in_assertion(
                a.inner, target, replacement))
        if a.kind in (S.MEM_OBJ, S.MEM_FEAT):
            return S.member(fix_ind(a.ind),
                            replace_subtree(a.concept, target, replacement))
        left, right = fix_ind(a.left), fix_ind(a.right)
        if a.kind == S.REL_I:
            return S.rel_i(left, right)
        if a.kind == S.REL_BOX:
            return S.rel_box(a.index, left, right)
        return S.rel_dia(a.index, left, right)

    # -- separation / differentiation / identity ---------------------------------

    def _separation_rules(self, first: S.Individual, second: S.Individual,
                          role: Role, both: bool):
        if role.kind == "I":
            ctor = (T.ObjectInclusionRule if first.sort == S.OBJ
                    else T.FeatureInclusionRule)
            rules = [ctor(first, second)]
            if both:
                rules.append(ctor(second, first))
        else:
            ctor = (T.ObjectRoleInclusionRule if first.sort == S.OBJ
                    else T.FeatureRoleInclusionRule)
            rules = [ctor(role, first, second)]
            if both:
                rules.append(ctor(role, second, first))
        rs = T.BASE_RULES
        for r in rules:
            rs = T.add_extra_rule(rs, r)
        return rs

    def ask_separation(self, first: S.Individual, second: S.Individual,
                       role: Role = Role("I")) -> Answer:
        """Does the ABox entail some fact of `first` under the role that
        `second` provably lacks?  Decided by saturating with the rule
        that copies first's facts to second: entailed iff that clashes."""
        self._require_consistent()
        self._known(first)
        self._known(second)
        if first.sort != second.sort:
            raise UnsupportedQueryError("separation compares same-sort names")
        run = self._saturate(self.abox,
                             self._separation_rules(first, second, role, False))
        if run.is_consistent:
            return Answer(False, {"kind": "no-clash"})
        return Answer(True, {"kind": "clash",
                             "steps": _steps_payload(run.clash_certificate())})

    def ask_relation_separation(self, lhs: Role, rhs: Role,
                                pivot: S.Individual) -> Answer:
        """Does the ABox entail that the pivot has an lhs-role fact whose
        rhs-role counterpart provably fails?"""
        self._require_consistent()
        self._known(pivot)
        rule = T.RelationInclusionRule(lhs, rhs, pivot)
        rs = T.add_extra_rule(T.BASE_RULES, rule)
        run = self._saturate(self.abox, rs)
        if run.is_consistent:
            return Answer(False, {"kind": "no-clash"})
        return Answer(True, {"kind": "clash",
                             "steps": _steps_payload(run.clash_certificate())})

    def ask_differentiation(self, first: S.Individual, second: S.Individual,
                            role: Role = Role("I")) -> Answer:
        """Are the two names provably distinguishable under the role?
        One saturation with both copy directions: distinguishable iff
        forcing their rows equal is inconsistent."""
        self._require_consistent()
        self._known(first)
        self._known(second)
        if first is second:
            return Answer(False, {"kind": "no-clash"})
        if first.sort != second.sort:
            raise UnsupportedQueryError(
                "differentiation compares same-sort names")
        run = self._saturate(self.abox,
                             self._separation_rules(first, second, role, True))
        if run.is_consistent:
            return Answer(False, {"kind": "no-clash"})
        return Answer(True, {"kind": "clash",
                             "steps": _steps_payload(run.clash_certificate())})

    def ask_identity(self, first: S.Individual,
                     second: S.Individual) -> Answer:
        """Provably-not-identical: some relation (I or any box/dia role)
        differentiates the two names."""
        self._require_consistent()
        box_is, dia_is = self._role_indices()
        roles = [Role("I")] + [Role("box", i) for i in box_is] + \
                [Role("dia", i) for i in dia_is]
        for role in roles:
            sub = self.ask_differentiation(first, second, role)
            if sub.value:
                cert = dict(sub.certificate)
                cert["role"] = str(role)
                return Answer(True, cert)
        return Answer(False, {"kind": "no-clash",
                              "roles": [str(r) for r in roles]})

    # -- equivalence ---------------------------------------------------------------

    def _entails(self, t: S.Assertion) -> bool:
        known = self.completion.original_individuals()
        if t.kind == S.NEG:
            inner = t.inner
            if inner.is_relational:
                return S.neg(inner) in self.abox
            if inner.ind not in known:
                run = self._saturate(self.abox | {inner})
                return not run.is_consistent
            return self.ask_negative_membership(inner.ind, inner.concept).value
        if any(i not in known for i in t.individuals()):
            return False
        if t.kind in (S.MEM_OBJ, S.MEM_FEAT):
            return self.ask_membership(t.ind, t.concept).value
        if t.kind == S.REL_I:
            return self.ask_relational(t.left, Role("I"), t.right).value
        if t.kind == S.REL_BOX:
            return self.ask_relational(t.left, Role("box", t.index), t.right).value
        return self.ask_relational(t.left, Role("dia", t.index), t.right).value

    def ask_equivalence(self, other) -> Answer:
        """Are the two ABoxes equivalent: every term of each entailed by
        the other?"""
        self._require_consistent()
        if isinstance(other, QueryEngine):
            peer = other
        else:
            peer = QueryEngine(other, max_steps=self.max_steps)
        peer._require_consistent()
        failures = []
        for t in sorted(peer.abox, key=str):
            if not self._entails(t):
                failures.append(f"first does not entail: {t}")
        for t in sorted(self.abox, key=str):
            if not peer._entails(t):
                failures.append(f"second does not entail: {t}")
        return Answer(not failures,
                      {"kind": "equivalence", "failures": failures})
