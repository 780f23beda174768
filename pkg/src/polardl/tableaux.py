"""Saturation engine: expansion rules, clash detection, completions.

An assertion set is saturated under the expansion rules below until no
rule adds anything new.  A *clash* is the co-presence of a relational
term and its negation; the input is inconsistent exactly when the
saturated set contains a clash.  Rules never branch and never retract,
so the fixpoint is unique regardless of scheduling.

Base rules (one line per rule; premises left of =>):

    create:   C occurring in the input        =>  a_C : C,  x_C :: C
    I:        b : C,  y :: C                  =>  b I y
    and_A:    b : C1 and C2                   =>  b : C1,  b : C2
    or_X:     y :: C1 or C2                   =>  y :: C1,  y :: C2
    box:      b : boxi C,  y :: C             =>  b Rboxi y
    dia:      y :: diai C,  b : C             =>  y Rdiai b
    box_y:    b I boxi(y)                     =>  b Rboxi y
    bsq_y:    b I bsqi(y)                     =>  y Rdiai b
    dia_b:    diai(b) I y                     =>  y Rdiai b
    bdia_b:   bdiai(b) I y                    =>  b Rboxi y
    and_inv:  b : C1,  b : C2   [C1 and C2 occurs in the input]
                                              =>  b : C1 and C2
    or_inv:   y :: C1,  y :: C2 [C1 or C2 occurs in the input]
                                              =>  y :: C1 or C2
    adj_box:  b Rboxi y                       =>  bdiai(b) I y,  b I boxi(y)
    adj_dia:  y Rdiai b                       =>  diai(b) I y,  b I bsqi(y)
    neg_b:    not (b : C)                     =>  not (b I x_C)
    neg_x:    not (y :: C)                    =>  not (a_C I y)
    append_x: b I x_C                         =>  b : C
    append_a: a_C I y                         =>  y :: C

Side conditions of and_inv/or_inv test occurrence in the input set,
frozen at saturation start; creation likewise runs once, up front, for
the concepts occurring in the input.  The classifier identifications
(``diai(a_C) = a_{diai C}``, ``boxi(x_C) = x_{boxi C}``) are built into
the term constructors; the adjoint-shape rules (box_y, bsq_y, dia_b,
bdia_b) match explicit adjoint names only, while the appending rules
match classifier names only, so every name triggers exactly the rules
of its normal form.

Extra rules fold a universal axiom into saturation; consistency of the
extended set decides the corresponding separation query.  Negative
assertions never match a positive premise: they only feed neg_b/neg_x
and clash detection.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field

from .errors import (ResourceLimitError, UnknownIndividualError,
                     UnsupportedRuleError)
from . import syntax as S
from .syntax import Role


# ---------------------------------------------------------------------------
# Extra (separation) rules
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectInclusionRule:
    """From ``src I x`` infer ``dst I x`` (axiom: every feature of src is
    a feature of dst)."""
    src: S.Individual
    dst: S.Individual

    @property
    def label(self):
        return f"SA({self.src},{self.dst})"

    def individuals(self):
        return (self.src, self.dst)


@dataclass(frozen=True)
class FeatureInclusionRule:
    """From ``a I src`` infer ``a I dst``."""
    src: S.Individual
    dst: S.Individual

    @property
    def label(self):
        return f"SX({self.src},{self.dst})"

    def individuals(self):
        return (self.src, self.dst)


@dataclass(frozen=True)
class ObjectRoleInclusionRule:
    """Per-role analogue of ObjectInclusionRule at a box or dia role."""
    role: Role
    src: S.Individual
    dst: S.Individual

    @property
    def label(self):
        return f"SA[{self.role}]({self.src},{self.dst})"

    def individuals(self):
        return (self.src, self.dst)


@dataclass(frozen=True)
class FeatureRoleInclusionRule:
    role: Role
    src: S.Individual
    dst: S.Individual

    @property
    def label(self):
        return f"SX[{self.role}]({self.src},{self.dst})"

    def individuals(self):
        return (self.src, self.dst)


@dataclass(frozen=True)
class RelationInclusionRule:
    """At a pivot individual, every lhs-role fact implies the rhs fact.

    Supported: box->dia and box->I at an object pivot, dia->box and
    dia->I at a feature pivot.  The I->box / I->dia directions have no
    terminating expansion and are rejected.
    """
    lhs: Role
    rhs: Role
    pivot: S.Individual

    @property
    def label(self):
        tag = "SA" if self.pivot.sort == S.OBJ else "SX"
        return f"{tag}({self.lhs},{self.rhs},{self.pivot})"

    def individuals(self):
        return (self.pivot,)


EXTRA_RULE_TYPES = (ObjectInclusionRule, FeatureInclusionRule,
                    ObjectRoleInclusionRule, FeatureRoleInclusionRule,
                    RelationInclusionRule)


@dataclass(frozen=True)
class RuleSet:
    """The base expansion rules plus zero or more extra rules."""
    extras: tuple = ()

    @property
    def has_relation_inclusion(self):
        return any(isinstance(r, RelationInclusionRule) for r in self.extras)


BASE_RULES = RuleSet()


def add_extra_rule(rules: RuleSet, extra) -> RuleSet:
    """Validated, functional extension of a rule set."""
    if not isinstance(extra, EXTRA_RULE_TYPES):
        raise UnsupportedRuleError(f"unknown extra rule {extra!r}")
    if isinstance(extra, RelationInclusionRule):
        if extra.lhs.kind == "I":
            raise UnsupportedRuleError(
                "inclusions of I into a box or dia role may not terminate")
        if extra.lhs.kind == "box":
            if extra.rhs.kind not in ("dia", "I") or extra.pivot.sort != S.OBJ:
                raise UnsupportedRuleError(f"unsupported direction {extra.label}")
        else:
            if extra.rhs.kind not in ("box", "I") or extra.pivot.sort != S.FEAT:
                raise UnsupportedRuleError(f"unsupported direction {extra.label}")
    if isinstance(extra, (ObjectRoleInclusionRule, FeatureRoleInclusionRule)):
        if extra.role.kind == "I":
            raise UnsupportedRuleError(
                "use ObjectInclusionRule/FeatureInclusionRule for I")
    return RuleSet(rules.extras + (extra,))


def fresh_names(c: S.Concept):
    """The canonical classifier pair (a_C, x_C) for a concept; stable
    across calls and identified with the adjoint spellings."""
    return S.classifier_obj(c), S.classifier_feat(c)


# ---------------------------------------------------------------------------
# Completion
# ---------------------------------------------------------------------------

@dataclass
class Completion:
    """The saturated assertion set with provenance and clash witness."""

    input_assertions: frozenset
    assertions: tuple
    provenance: dict                  # assertion -> (rule label, premises)
    clash: tuple | None               # (positive term, its negation)
    stats: dict                       # rule label -> additions
    invariant_violations: tuple
    occurring: frozenset              # concepts occurring in the input
    abox_depth: S.DepthProfile
    rules: RuleSet
    _index: dict = field(default_factory=dict, repr=False)

    @property
    def is_consistent(self) -> bool:
        return self.clash is None

    def __contains__(self, a: S.Assertion) -> bool:
        return a in self.provenance

    def positives(self):
        return [a for a in self.assertions if a.kind != S.NEG]

    def objects(self):
        return self._carrier(S.OBJ)

    def features(self):
        return self._carrier(S.FEAT)

    def _carrier(self, sort):
        key = ("carrier", sort)
        if key not in self._index:
            seen = {}
            for a in self.assertions:
                for ind in a.individuals():
                    if ind.sort == sort:
                        seen[ind] = None
            self._index[key] = tuple(seen)
        return self._index[key]

    def original_individuals(self):
        key = "orig"
        if key not in self._index:
            seen = {}
            for a in self.input_assertions:
                for ind in a.individuals():
                    seen[ind] = None
            self._index[key] = frozenset(seen)
        return self._index[key]

    def related(self, role: Role, anchor: S.Individual, side: str):
        """Individuals n with the (anchor, n) fact (side 'right') or the
        (n, anchor) fact (side 'left') for the given role."""
        out = []
        for a in self.assertions:
            if a.kind == S.REL_I and role.kind == "I":
                pass
            elif a.kind == S.REL_BOX and role.kind == "box" and a.index == role.index:
                pass
            elif a.kind == S.REL_DIA and role.kind == "dia" and a.index == role.index:
                pass
            else:
                continue
            if side == "right" and a.left is anchor:
                out.append(a.right)
            elif side == "left" and a.right is anchor:
                out.append(a.left)
        return out

    def steps(self):
        """Full derivation trace: (rule, premises, conclusion) per added
        assertion, input terms excluded."""
        return [(self.provenance[a][0], self.provenance[a][1], a)
                for a in self.assertions if self.provenance[a][0] != "input"]

    def clash_certificate(self):
        """Derivation steps leading to the clash pair: the chain that
        derives the positive term first, then the chain producing its
        negation; empty when consistent."""
        if self.clash is None:
            return []
        order = {a: i for i, a in enumerate(self.assertions)}

        def ancestors(root):
            seen = set()
            queue = [root]
            while queue:
                a = queue.pop()
                if a in seen:
                    continue
                seen.add(a)
                queue.extend(self.provenance[a][1])
            return sorted((a for a in seen if self.provenance[a][0] != "input"),
                          key=order.__getitem__)

        term, negation = self.clash
        chain = ancestors(term)
        listed = set(chain)
        chain += [a for a in ancestors(negation) if a not in listed]
        return [(self.provenance[a][0], self.provenance[a][1], a) for a in chain]


# ---------------------------------------------------------------------------
# Saturation
# ---------------------------------------------------------------------------

class _Saturation:
    def __init__(self, inputs, rules: RuleSet, max_steps, shuffle_seed):
        self.rules = rules
        self.max_steps = max_steps
        self.rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
        self.inputs = frozenset(inputs)

        self.store: dict = {}        # assertion -> (rule, premises)
        self.order: list = []
        self.pos_relational: dict = {}   # positive relational terms present
        self.neg_relational: dict = {}   # relational terms under a negation
        self.obj_mem: dict = {}      # b -> {C: None}
        self.feat_mem: dict = {}
        self.obj_of: dict = {}       # C -> {b: None}
        self.feat_of: dict = {}
        self.box_mem: dict = {}      # child C -> {(i, b): None}
        self.dia_mem: dict = {}      # child C -> {(i, y): None}
        self.clash = None
        self.stats: dict = {}
        self.violations: list = []
        self.worklist = deque()

        self.occurring = S.occurring_concepts(self.inputs)
        self.abox_depth = S.abox_depths(self.inputs)
        self.meet_partners: dict = {}   # operand -> [(meet, other operand)]
        self.join_partners: dict = {}
        for c in self.occurring:
            if c.kind == S.MEET:
                self.meet_partners.setdefault(c.left, []).append((c, c.right))
                if c.right is not c.left:
                    self.meet_partners.setdefault(c.right, []).append((c, c.left))
            elif c.kind == S.JOIN:
                self.join_partners.setdefault(c.left, []).append((c, c.right))
                if c.right is not c.left:
                    self.join_partners.setdefault(c.right, []).append((c, c.left))

        self.obj_incl: dict = {}     # src -> [(dst, label)]
        self.feat_incl: dict = {}
        self.role_incl_box: dict = {}   # (i, pivot or src) handled per kind
        for extra in rules.extras:
            if isinstance(extra, ObjectInclusionRule):
                self.obj_incl.setdefault(extra.src, []).append(
                    (extra.dst, extra.label))
            elif isinstance(extra, FeatureInclusionRule):
                self.feat_incl.setdefault(extra.src, []).append(
                    (extra.dst, extra.label))
        self.extras = rules.extras

    # -- store primitives ---------------------------------------------------

    def add(self, a: S.Assertion, rule: str, premises: tuple):
        if a in self.store or self.clash is not None:
            return
        self.store[a] = (rule, premises)
        self.order.append(a)
        self.stats[rule] = self.stats.get(rule, 0) + 1
        self.worklist.append(a)
        if a.kind == S.NEG:
            if a.inner.is_relational:
                self.neg_relational[a.inner] = a
                if a.inner in self.pos_relational:
                    self.clash = (a.inner, a)
        else:
            if a.is_relational:
                self.pos_relational[a] = None
                hit = self.neg_relational.get(a)
                if hit is not None:
                    self.clash = (a, hit)
            self._check_shape(a)
            self._index_positive(a)

    def _check_shape(self, a: S.Assertion):
        # Box/diamond derivations must stay disjoint: a diamond image never
        # meets a box image through I, never heads a box-role fact, and the
        # adjoint constructors never stack over the opposite image.
        if a.kind == S.REL_I:
            if (S.dia_adjoint_view(a.left) is not None
                    and S.box_adjoint_view(a.right) is not None):
                self.violations.append(f"dia-image I box-image: {a}")
        elif a.kind == S.REL_BOX:
            if S.dia_adjoint_view(a.left) is not None:
                self.violations.append(f"dia-image heads a box-role fact: {a}")

    def _index_positive(self, a: S.Assertion):
        if a.kind == S.MEM_OBJ:
            self.obj_mem.setdefault(a.ind, {})[a.concept] = None
            self.obj_of.setdefault(a.concept, {})[a.ind] = None
            c = a.concept
            if c.kind == S.BOX:
                self.box_mem.setdefault(c.child, {})[(c.index, a.ind)] = None
        elif a.kind == S.MEM_FEAT:
            self.feat_mem.setdefault(a.ind, {})[a.concept] = None
            self.feat_of.setdefault(a.concept, {})[a.ind] = None
            c = a.concept
            if c.kind == S.DIA:
                self.dia_mem.setdefault(c.child, {})[(c.index, a.ind)] = None

    # -- rule dispatch -------------------------------------------------------

    def fire(self, a: S.Assertion):
        if a.kind == S.MEM_OBJ:
            self.fire_obj_membership(a)
        elif a.kind == S.MEM_FEAT:
            self.fire_feat_membership(a)
        elif a.kind == S.REL_I:
            self.fire_incidence(a)
        elif a.kind == S.REL_BOX:
            self.fire_box_fact(a)
        elif a.kind == S.REL_DIA:
            self.fire_dia_fact(a)
        else:
            self.fire_negative(a)

    def fire_obj_membership(self, a):
        b, c = a.ind, a.concept
        if c.kind == S.MEET:
            self.add(S.member(b, c.left), "and_A", (a,))
            self.add(S.member(b, c.right), "and_A", (a,))
        for m, other in self.meet_partners.get(c, ()):
            if other in self.obj_mem.get(b, ()):
                self.add(S.member(b, m), "and_inv", (a, S.member(b, other)))
        for y in list(self.feat_of.get(c, ())):
            self.add(S.rel_i(b, y), "I", (a, S.member(y, c)))
        if c.kind == S.BOX:
            for y in list(self.feat_of.get(c.child, ())):
                self.add(S.rel_box(c.index, b, y), "box",
                         (a, S.member(y, c.child)))
        for i, y in list(self.dia_mem.get(c, ())):
            self.add(S.rel_dia(i, y, b), "dia", (S.member(y, S.dia(i, c)), a))

    def fire_feat_membership(self, a):
        y, c = a.ind, a.concept
        if c.kind == S.JOIN:
            self.add(S.member(y, c.left), "or_X", (a,))
            self.add(S.member(y, c.right), "or_X", (a,))
        for j, other in self.join_partners.get(c, ()):
            if other in self.feat_mem.get(y, ()):
                self.add(S.member(y, j), "or_inv", (a, S.member(y, other)))
        for b in list(self.obj_of.get(c, ())):
            self.add(S.rel_i(b, y), "I", (S.member(b, c), a))
        if c.kind == S.DIA:
            for b in list(self.obj_of.get(c.child, ())):
                self.add(S.rel_dia(c.index, y, b), "dia",
                         (a, S.member(b, c.child)))
        for i, b in list(self.box_mem.get(c, ())):
            self.add(S.rel_box(i, b, y), "box", (S.member(b, S.box(i, c)), a))

    def fire_incidence(self, a):
        b, y = a.left, a.right
        if y.kind == S.CLASSIFIER:
            self.add(S.member(b, y.concept), "append_x", (a,))
        elif y.kind == S.ADJ_BOX:
            self.add(S.rel_box(y.index, b, y.base), "box_y", (a,))
        elif y.kind == S.BLACK_SQ:
            self.add(S.rel_dia(y.index, y.base, b), "bsq_y", (a,))
        if b.kind == S.CLASSIFIER:
            self.add(S.member(y, b.concept), "append_a", (a,))
        elif b.kind == S.ADJ_DIA:
            self.add(S.rel_dia(b.index, y, b.base), "dia_b", (a,))
        elif b.kind == S.BLACK_DIA:
            self.add(S.rel_box(b.index, b.base, y), "bdia_b", (a,))
        for dst, label in self.obj_incl.get(b, ()):
            self.add(S.rel_i(dst, y), label, (a,))
        for dst, label in self.feat_incl.get(y, ()):
            self.add(S.rel_i(b, dst), label, (a,))

    def fire_box_fact(self, a):
        i, b, y = a.index, a.left, a.right
        if S.dia_adjoint_view(b) is not None:
            self.violations.append(
                f"black diamond built over a dia-image: bdia{i}({b})")
        self.add(S.rel_i(S.black_diamond(b, i), y), "adj_box", (a,))
        self.add(S.rel_i(b, S.adj_box(y, i)), "adj_box", (a,))
        for extra in self.extras:
            if isinstance(extra, RelationInclusionRule) and \
                    extra.lhs.kind == "box" and extra.lhs.index == i and \
                    extra.pivot is b:
                if extra.rhs.kind == "dia":
                    self.add(S.rel_dia(extra.rhs.index, y, b), extra.label, (a,))
                else:
                    self.add(S.rel_i(b, y), extra.label, (a,))
            elif isinstance(extra, ObjectRoleInclusionRule) and \
                    extra.role.kind == "box" and extra.role.index == i and \
                    extra.src is b:
                self.add(S.rel_box(i, extra.dst, y), extra.label, (a,))
            elif isinstance(extra, FeatureRoleInclusionRule) and \
                    extra.role.kind == "box" and extra.role.index == i and \
                    extra.src is y:
                self.add(S.rel_box(i, b, extra.dst), extra.label, (a,))

    def fire_dia_fact(self, a):
        i, y, b = a.index, a.left, a.right
        if S.box_adjoint_view(y) is not None:
            self.violations.append(
                f"black square built over a box-image: bsq{i}({y})")
        self.add(S.rel_i(S.adj_diamond(b, i), y), "adj_dia", (a,))
        self.add(S.rel_i(b, S.black_square(y, i)), "adj_dia", (a,))
        for extra in self.extras:
            if isinstance(extra, RelationInclusionRule) and \
                    extra.lhs.kind == "dia" and extra.lhs.index == i and \
                    extra.pivot is y:
                if extra.rhs.kind == "box":
                    self.add(S.rel_box(extra.rhs.index, b, y), extra.label, (a,))
                else:
                    self.add(S.rel_i(b, y), extra.label, (a,))
            elif isinstance(extra, ObjectRoleInclusionRule) and \
                    extra.role.kind == "dia" and extra.role.index == i and \
                    extra.src is b:
                self.add(S.rel_dia(i, y, extra.dst), extra.label, (a,))
            elif isinstance(extra, FeatureRoleInclusionRule) and \
                    extra.role.kind == "dia" and extra.role.index == i and \
                    extra.src is y:
                self.add(S.rel_dia(i, extra.dst, b), extra.label, (a,))

    def fire_negative(self, a):
        t = a.inner
        if t.kind == S.MEM_OBJ:
            self.add(S.neg(S.rel_i(t.ind, S.classifier_feat(t.concept))),
                     "neg_b", (a,))
        elif t.kind == S.MEM_FEAT:
            self.add(S.neg(S.rel_i(S.classifier_obj(t.concept), t.ind)),
                     "neg_x", (a,))

    # -- main loop -----------------------------------------------------------

    def run(self) -> Completion:
        present = S.individuals_in(self.inputs)
        for extra in self.extras:
            for ind in extra.individuals():
                if ind not in present:
                    raise UnknownIndividualError(
                        f"extra rule names {ind}, which does not occur in the ABox")

        for a in sorted(self.inputs, key=str):
            self.add(a, "input", ())
        for c in sorted(self.occurring, key=str):
            a_c, x_c = fresh_names(c)
            self.add(S.member(a_c, c), "create", ())
            self.add(S.member(x_c, c), "create", ())

        steps = 0
        while self.worklist and self.clash is None:
            if self.rng is None:
                a = self.worklist.popleft()
            else:
                k = self.rng.randrange(len(self.worklist))
                self.worklist.rotate(-k)
                a = self.worklist.popleft()
                self.worklist.rotate(k)
            steps += 1
            if self.max_steps is not None and steps > self.max_steps:
                raise ResourceLimitError(
                    f"saturation exceeded {self.max_steps} steps")
            self.fire(a)

        return Completion(
            input_assertions=self.inputs,
            assertions=tuple(self.order),
            provenance=self.store,
            clash=self.clash,
            stats=self.stats,
            invariant_violations=tuple(self.violations),
            occurring=self.occurring,
            abox_depth=self.abox_depth,
            rules=self.rules,
        )


def saturate(assertions, rules: RuleSet = BASE_RULES, *,
             max_steps: int | None = None,
             shuffle_seed: int | None = None) -> Completion:
    """Saturate an assertion set under the given rules.

    Deterministic by default (fixed scheduling); pass shuffle_seed to run
    a randomized fair schedule, which reaches the same fixpoint.  A
    clash short-circuits saturation; the partial set is still reported.
    """
    return _Saturation(assertions, rules, max_steps, shuffle_seed).run()


def check_consistency(assertions, **kwargs) -> Completion:
    """Saturate under the base rules; the input is consistent iff the
    returned completion has no clash."""
    return saturate(assertions, BASE_RULES, **kwargs)
