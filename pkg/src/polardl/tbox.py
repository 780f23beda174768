"""Terminological axioms: inclusion rewriting, acyclicity, unraveling.

An inclusion ``C1 sub C2`` is rewritten as the equivalence
``C1 equiv C2 and G`` for a fresh atomic name G.  A definitional set of
equivalences (atomic left-hand sides, each name defined once, no
dependency cycles) is then unraveled: every defined name in every ABox
assertion is exhaustively replaced by its definition, so downstream
reasoning only ever sees a plain ABox.  Expansion can blow up
exponentially, so a node budget guards it.

Unraveling also emits the classifier membership pair ``a_C : C`` /
``x_C :: C`` for each definition's expanded right-hand side.  These are
exactly the terms the creation rule would add for an occurring concept;
emitting them keeps defined categories queryable even when no ABox
assertion mentions them.
"""

from __future__ import annotations

from .errors import CycleError, MultipleDefinitionError, SizeLimitError
from .parser import KnowledgeBase, TBoxAxiom
from . import syntax as S


def rewrite_gci(ax: TBoxAxiom, taken_names=(), counter_start=1) -> TBoxAxiom:
    """Rewrite an inclusion axiom as an equivalence with a fresh conjunct.

    The fresh atomic name avoids everything in taken_names.
    """
    if ax.kind != "sub":
        raise ValueError("rewrite_gci applies to inclusion axioms only")
    taken = set(taken_names)
    n = counter_start
    while f"G{n}" in taken:
        n += 1
    fresh = S.atom(f"G{n}")
    return TBoxAxiom("equiv", ax.lhs, S.meet(ax.rhs, fresh))


def rewrite_all(kb: KnowledgeBase) -> tuple:
    """Rewrite every inclusion in kb's TBox; returns equivalences only."""
    taken = kb.atom_names()
    out = []
    for ax in kb.tbox:
        if ax.kind == "sub":
            ax = rewrite_gci(ax, taken)
            taken |= {s.name for s in S.subconcepts(ax.rhs) if s.kind == S.ATOM}
        out.append(ax)
    return tuple(out)


def check_acyclic(tbox) -> list:
    """Topological order of defined names (dependencies first).

    Every axiom must be an equivalence with an atomic left-hand side.
    Raises MultipleDefinitionError on duplicate definitions and
    CycleError (carrying the cycle) on circular dependencies.
    """
    defs = {}
    for ax in tbox:
        if ax.kind != "equiv":
            raise ValueError(f"inclusion axiom not rewritten: {ax}")
        if ax.lhs.kind != S.ATOM:
            raise ValueError(f"definition with non-atomic left-hand side: {ax}")
        if ax.lhs.name in defs:
            raise MultipleDefinitionError(f"{ax.lhs.name} is defined twice")
        defs[ax.lhs.name] = ax.rhs

    deps = {
        name: sorted({s.name for s in S.subconcepts(rhs)
                      if s.kind == S.ATOM and s.name in defs})
        for name, rhs in defs.items()
    }

    order: list = []
    state: dict = {}     # name -> 1 (visiting) | 2 (done)
    stack: list = []

    def visit(name):
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            cycle = stack[stack.index(name):] + [name]
            raise CycleError(cycle)
        state[name] = 1
        stack.append(name)
        for dep in deps[name]:
            visit(dep)
        stack.pop()
        state[name] = 2
        order.append(name)

    for name in defs:
        visit(name)
    return order


def substitute_concept(c: S.Concept, mapping: dict, _memo=None) -> S.Concept:
    """Replace every atom found in mapping by its image, recursively on
    the tree (images are assumed free of mapped atoms)."""
    if _memo is None:
        _memo = {}
    got = _memo.get(c)
    if got is not None:
        return got
    if c.kind == S.ATOM:
        out = mapping.get(c.name, c)
    elif c.kind == S.MEET:
        out = S.meet(substitute_concept(c.left, mapping, _memo),
                     substitute_concept(c.right, mapping, _memo))
    elif c.kind == S.JOIN:
        out = S.join(substitute_concept(c.left, mapping, _memo),
                     substitute_concept(c.right, mapping, _memo))
    elif c.kind == S.BOX:
        out = S.box(c.index, substitute_concept(c.child, mapping, _memo))
    else:
        out = S.dia(c.index, substitute_concept(c.child, mapping, _memo))
    _memo[c] = out
    return out


def replace_subtree(c: S.Concept, target: S.Concept,
                    replacement: S.Concept) -> S.Concept:
    """Replace every occurrence of the subtree target inside c."""
    if c is target:
        return replacement
    if c.kind == S.ATOM:
        return c
    if c.kind == S.MEET:
        return S.meet(replace_subtree(c.left, target, replacement),
                      replace_subtree(c.right, target, replacement))
    if c.kind == S.JOIN:
        return S.join(replace_subtree(c.left, target, replacement),
                      replace_subtree(c.right, target, replacement))
    if c.kind == S.BOX:
        return S.box(c.index, replace_subtree(c.child, target, replacement))
    return S.dia(c.index, replace_subtree(c.child, target, replacement))


def definition_map(kb: KnowledgeBase, max_nodes: int = 1_000_000) -> dict:
    """Fully expanded definition for each defined name, or raise."""
    tbox = rewrite_all(kb)
    order = check_acyclic(tbox)
    raw = {ax.lhs.name: ax.rhs for ax in tbox}
    expanded: dict = {}
    total = 0
    for name in order:
        c = substitute_concept(raw[name], expanded)
        total += c.size
        if total > max_nodes:
            raise SizeLimitError(
                f"definition expansion exceeded {max_nodes} nodes")
        expanded[name] = c
    return expanded


def substitute_individual(ind: S.Individual, mapping: dict) -> S.Individual:
    """Rewrite defined names inside synthetic individual spellings."""
    if ind.kind == S.NAMED:
        return ind
    if ind.kind == S.CLASSIFIER:
        c = substitute_concept(ind.concept, mapping)
        return (S.classifier_obj(c) if ind.sort == S.OBJ
                else S.classifier_feat(c))
    base = substitute_individual(ind.base, mapping)
    ctor = {S.BLACK_DIA: S.black_diamond, S.ADJ_DIA: S.adj_diamond,
            S.ADJ_BOX: S.adj_box, S.BLACK_SQ: S.black_square}[ind.kind]
    return ctor(base, ind.index)


def substitute_assertion(a: S.Assertion, mapping: dict) -> S.Assertion:
    if a.kind == S.NEG:
        return S.neg(substitute_assertion(a.inner, mapping))
    if a.kind in (S.MEM_OBJ, S.MEM_FEAT):
        return S.member(substitute_individual(a.ind, mapping),
                        substitute_concept(a.concept, mapping))
    left = substitute_individual(a.left, mapping)
    right = substitute_individual(a.right, mapping)
    if a.kind == S.REL_I:
        return S.rel_i(left, right)
    if a.kind == S.REL_BOX:
        return S.rel_box(a.index, left, right)
    return S.rel_dia(a.index, left, right)


def unravel(kb: KnowledgeBase, max_nodes: int = 1_000_000) -> frozenset:
    """Unravel the knowledge base into a plain assertion set.

    Output contains no defined name; a knowledge base with an empty TBox
    comes back unchanged.  For each definition, the classifier membership
    pair of its expanded right-hand side is included so the defined
    category exists in the saturated universe.
    """
    if not kb.tbox:
        return frozenset(kb.abox)
    mapping = definition_map(kb, max_nodes)
    out = set()
    total = 0
    for a in kb.abox:
        b = substitute_assertion(a, mapping)
        t = b.inner if b.kind == S.NEG else b
        if t.kind in (S.MEM_OBJ, S.MEM_FEAT):
            total += t.concept.size
            if total > max_nodes:
                raise SizeLimitError(
                    f"ABox expansion exceeded {max_nodes} nodes")
        out.add(b)
    present = S.occurring_concepts(out)
    for rhs in mapping.values():
        if rhs not in present:
            out.add(S.member(S.classifier_obj(rhs), rhs))
            out.add(S.member(S.classifier_feat(rhs), rhs))
    return frozenset(out)
