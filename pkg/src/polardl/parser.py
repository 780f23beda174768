"""Surface syntax for knowledge bases: parser and serializer.

Grammar (EBNF; `#` starts a line comment, statements end with `.`):

    doc      := (decl | axiom | assertion)*
    decl     := "obj" name+ "." | "feat" name+ "." | "roles" "box" INT "dia" INT "."
    concept  := name | concept "and" concept | concept "or" concept
              | "box"INT concept | "dia"INT concept | "(" concept ")"
    axiom    := concept ("equiv" | "sub") concept "."
    assertion:= ["not"] atom "."
    atom     := name ":" concept | name "::" concept | name "I" name
              | name "Rbox"INT name | name "Rdia"INT name

Modal operators spell their index directly (`box1`, `dia2`, `Rbox1`,
`Rdia2`) and bind tighter than `and`, which binds tighter than `or`;
`and`/`or` chains associate to the right.  Individual names must be
declared with their sort before use; role indices must be covered by a
`roles` declaration.  Only named individuals exist in the surface syntax:
the synthetic names produced by saturation cannot be written or printed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, SerializationError, UndeclaredRoleError
from . import syntax as S

KEYWORDS = {"obj", "feat", "roles", "and", "or", "not", "equiv", "sub",
            "I", "box", "dia"}

_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+|::|[:.()]|\S")
_MODAL_RE = re.compile(r"^(box|dia|Rbox|Rdia)([0-9]+)$")


@dataclass(frozen=True)
class TBoxAxiom:
    kind: str       # "equiv" | "sub"
    lhs: S.Concept
    rhs: S.Concept

    def __str__(self):
        return f"{self.lhs} {self.kind} {self.rhs}"


@dataclass
class KnowledgeBase:
    """Parsed knowledge base: declarations, terminological axioms, ABox."""

    obj_names: tuple = ()
    feat_names: tuple = ()
    box_roles: int = 0
    dia_roles: int = 0
    tbox: tuple = ()           # of TBoxAxiom
    abox: frozenset = field(default_factory=frozenset)  # of S.Assertion

    def atom_names(self) -> set:
        names = set()
        for ax in self.tbox:
            for c in (ax.lhs, ax.rhs):
                names |= {s.name for s in S.subconcepts(c) if s.kind == S.ATOM}
        for c in S.occurring_concepts(self.abox):
            if c.kind == S.ATOM:
                names.add(c.name)
        return names


@dataclass
class _Tok:
    kind: str    # NAME, MODAL, SYM, EOF
    text: str
    line: int
    col: int
    mod: tuple | None = None   # (op, index) for MODAL


def _tokenize(text: str):
    toks = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        for m in _TOKEN_RE.finditer(body):
            word = m.group(0)
            col = m.start() + 1
            if word[0].isalpha() or word[0] == "_":
                mm = _MODAL_RE.match(word)
                if mm:
                    toks.append(_Tok("MODAL", word, lineno, col,
                                     (mm.group(1), int(mm.group(2)))))
                else:
                    toks.append(_Tok("NAME", word, lineno, col))
            elif word.isdigit():
                toks.append(_Tok("INT", word, lineno, col))
            elif word in (":", "::", ".", "(", ")"):
                toks.append(_Tok("SYM", word, lineno, col))
            else:
                raise ParseError(f"unexpected character {word!r}", lineno, col)
    toks.append(_Tok("EOF", "", len(text.splitlines()) + 1, 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.objs: dict[str, int] = {}
        self.feats: dict[str, int] = {}
        self.box_roles = 0
        self.dia_roles = 0
        self.tbox: list[TBoxAxiom] = []
        self.abox: set[S.Assertion] = set()

    # -- token helpers -----------------------------------------------------

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect_sym(self, sym: str) -> _Tok:
        t = self.next()
        if t.kind != "SYM" or t.text != sym:
            raise ParseError(f"expected {sym!r}, found {t.text or 'end of input'!r}",
                             t.line, t.col)
        return t

    def fail(self, tok: _Tok, msg: str):
        raise ParseError(msg, tok.line, tok.col)

    # -- declarations ------------------------------------------------------

    def parse(self) -> KnowledgeBase:
        while self.peek().kind != "EOF":
            t = self.peek()
            if t.kind == "NAME" and t.text in ("obj", "feat"):
                self.decl_individuals()
            elif t.kind == "NAME" and t.text == "roles":
                self.decl_roles()
            elif (t.kind == "NAME" and t.text == "not") or self.is_assertion_start():
                self.assertion()
            else:
                self.axiom()
        return KnowledgeBase(
            obj_names=tuple(self.objs),
            feat_names=tuple(self.feats),
            box_roles=self.box_roles,
            dia_roles=self.dia_roles,
            tbox=tuple(self.tbox),
            abox=frozenset(self.abox),
        )

    def is_assertion_start(self) -> bool:
        t = self.peek()
        if t.kind != "NAME" or t.text in KEYWORDS:
            return False
        after = self.toks[self.pos + 1]
        if after.kind == "SYM" and after.text in (":", "::"):
            return True
        if after.kind == "NAME" and after.text == "I":
            return True
        return after.kind == "MODAL" and after.mod[0] in ("Rbox", "Rdia")

    def decl_individuals(self):
        sort_tok = self.next()
        table = self.objs if sort_tok.text == "obj" else self.feats
        other = self.feats if sort_tok.text == "obj" else self.objs
        count = 0
        while True:
            t = self.peek()
            if t.kind == "SYM" and t.text == ".":
                self.next()
                break
            if t.kind != "NAME" or t.text in KEYWORDS:
                self.fail(t, f"expected individual name, found {t.text!r}")
            if t.text in other:
                self.fail(t, f"{t.text!r} already declared with the other sort")
            table.setdefault(t.text, 0)
            self.next()
            count += 1
        if count == 0:
            self.fail(self.peek(), "empty declaration")

    def decl_roles(self):
        self.next()
        for kw in ("box", "dia"):
            t = self.next()
            if t.kind != "NAME" or t.text != kw:
                self.fail(t, f"expected {kw!r} in roles declaration")
            n = self.next()
            if n.kind != "INT":
                self.fail(n, "expected a role count")
            if kw == "box":
                self.box_roles = int(n.text)
            else:
                self.dia_roles = int(n.text)
        self.expect_sym(".")

    # -- concepts ----------------------------------------------------------

    def concept(self) -> S.Concept:
        return self.concept_or()

    def concept_or(self) -> S.Concept:
        left = self.concept_and()
        t = self.peek()
        if t.kind == "NAME" and t.text == "or":
            self.next()
            return S.join(left, self.concept_or())
        return left

    def concept_and(self) -> S.Concept:
        left = self.concept_unary()
        t = self.peek()
        if t.kind == "NAME" and t.text == "and":
            self.next()
            return S.meet(left, self.concept_and())
        return left

    def concept_unary(self) -> S.Concept:
        t = self.next()
        if t.kind == "MODAL" and t.mod[0] in ("box", "dia"):
            op, idx = t.mod
            self.check_role(op, idx, t)
            child = self.concept_unary()
            return S.box(idx, child) if op == "box" else S.dia(idx, child)
        if t.kind == "SYM" and t.text == "(":
            c = self.concept()
            self.expect_sym(")")
            return c
        if t.kind == "NAME" and t.text not in KEYWORDS:
            if t.text in self.objs or t.text in self.feats:
                self.fail(t, f"individual name {t.text!r} used as a concept")
            return S.atom(t.text)
        self.fail(t, f"expected a concept, found {t.text or 'end of input'!r}")

    def check_role(self, op: str, idx: int, tok: _Tok):
        limit = self.box_roles if op in ("box", "Rbox") else self.dia_roles
        if idx < 1 or idx > limit:
            raise UndeclaredRoleError(
                f"role index {idx} not covered by the roles declaration",
                tok.line, tok.col)

    # -- statements ----------------------------------------------------------

    def axiom(self):
        lhs = self.concept()
        t = self.next()
        if t.kind != "NAME" or t.text not in ("equiv", "sub"):
            self.fail(t, f"expected 'equiv' or 'sub', found {t.text!r}")
        rhs = self.concept()
        self.expect_sym(".")
        self.tbox.append(TBoxAxiom(t.text, lhs, rhs))

    def individual(self, want_sort: str) -> S.Individual:
        t = self.next()
        if t.kind != "NAME" or t.text in KEYWORDS:
            self.fail(t, f"expected individual name, found {t.text!r}")
        if want_sort == S.OBJ:
            if t.text in self.feats:
                self.fail(t, f"feature name {t.text!r} used as an object")
            if t.text not in self.objs:
                self.fail(t, f"undeclared object {t.text!r}")
            return S.named_obj(t.text)
        if t.text in self.objs:
            self.fail(t, f"object name {t.text!r} used as a feature")
        if t.text not in self.feats:
            self.fail(t, f"undeclared feature {t.text!r}")
        return S.named_feat(t.text)

    def assertion(self):
        negated = False
        if self.peek().kind == "NAME" and self.peek().text == "not":
            self.next()
            negated = True
        head = self.peek()
        if head.kind != "NAME" or head.text in KEYWORDS:
            self.fail(head, f"expected individual name, found {head.text!r}")
        sep = self.toks[self.pos + 1]
        if sep.kind == "SYM" and sep.text == ":":
            ind = self.individual(S.OBJ)
            self.next()
            term = S.member(ind, self.concept())
        elif sep.kind == "SYM" and sep.text == "::":
            ind = self.individual(S.FEAT)
            self.next()
            term = S.member(ind, self.concept())
        elif sep.kind == "NAME" and sep.text == "I":
            b = self.individual(S.OBJ)
            self.next()
            term = S.rel_i(b, self.individual(S.FEAT))
        elif sep.kind == "MODAL" and sep.mod[0] == "Rbox":
            b = self.individual(S.OBJ)
            self.next()
            self.check_role("Rbox", sep.mod[1], sep)
            term = S.rel_box(sep.mod[1], b, self.individual(S.FEAT))
        elif sep.kind == "MODAL" and sep.mod[0] == "Rdia":
            y = self.individual(S.FEAT)
            self.next()
            self.check_role("Rdia", sep.mod[1], sep)
            term = S.rel_dia(sep.mod[1], y, self.individual(S.OBJ))
        else:
            self.fail(sep, f"expected ':', '::' or a role after {head.text!r}")
        self.expect_sym(".")
        self.abox.add(S.neg(term) if negated else term)


def parse_kb(text: str) -> KnowledgeBase:
    """Parse a knowledge-base document. Raises ParseError with position."""
    return _Parser(text).parse()


def _context_parser(text: str, kb: KnowledgeBase) -> _Parser:
    p = _Parser(text)
    p.objs = {n: 0 for n in kb.obj_names}
    p.feats = {n: 0 for n in kb.feat_names}
    p.box_roles = kb.box_roles
    p.dia_roles = kb.dia_roles
    return p


def parse_concept(text: str, kb: KnowledgeBase) -> S.Concept:
    """Parse a standalone concept expression in the context of a KB."""
    p = _context_parser(text, kb)
    c = p.concept()
    t = p.peek()
    if t.kind != "EOF":
        p.fail(t, f"trailing input after concept: {t.text!r}")
    return c


def parse_term(text: str, kb: KnowledgeBase) -> S.Assertion:
    """Parse a standalone (possibly negated) ABox term for a KB."""
    p = _context_parser(text + " .", kb)
    p.assertion()
    t = p.peek()
    if t.kind != "EOF":
        p.fail(t, f"trailing input after term: {t.text!r}")
    return next(iter(p.abox))


def parse_individual(name: str, kb: KnowledgeBase) -> S.Individual:
    """Resolve a declared individual name to its sorted form."""
    if name in kb.obj_names:
        return S.named_obj(name)
    if name in kb.feat_names:
        return S.named_feat(name)
    raise ParseError(f"undeclared individual {name!r}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _check_surface_individual(ind: S.Individual):
    if ind.kind != S.NAMED:
        raise SerializationError(
            f"synthetic name {ind} has no surface spelling")


def serialize_kb(kb: KnowledgeBase) -> str:
    """Render a knowledge base so that parse_kb(serialize_kb(kb)) is
    structurally equal to kb. Synthetic individuals are rejected."""
    for a in kb.abox:
        for ind in a.individuals():
            _check_surface_individual(ind)
    lines = ["# knowledge base"]
    if kb.box_roles or kb.dia_roles:
        lines.append(f"roles box {kb.box_roles} dia {kb.dia_roles}.")
    if kb.obj_names:
        lines.append("obj " + " ".join(kb.obj_names) + ".")
    if kb.feat_names:
        lines.append("feat " + " ".join(kb.feat_names) + ".")
    for ax in kb.tbox:
        lines.append(f"{ax}.")
    for a in sorted(kb.abox, key=str):
        if a.kind == S.NEG:
            lines.append(f"not {a.inner}.")
        else:
            lines.append(f"{a}.")
    return "\n".join(lines) + "\n"
