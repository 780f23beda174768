"""Batch command-line front end.

Subcommands:

    check KB                 decide ABox consistency (exit 1 when inconsistent)
    ask KB <query flags>     answer one query (or --batch FILE for many)
    model KB [--csv]         export the saturated model
    trace KB                 dump the full derivation as JSON lines

Machine-readable output goes to stdout, diagnostics to stderr.  With
--format json every path prints a JSON document, including errors.
Identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys

from .errors import PolardlError
from .parser import (parse_concept, parse_individual, parse_kb, parse_term,
                     KnowledgeBase)
from .queries import QueryEngine
from .model import build_model, model_to_csv, model_to_dict
from .syntax import Role
from . import syntax as S


def _arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polardl",
                                 description="lattice description logic reasoner")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("kb", help="knowledge base file")
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--max-steps", type=int, default=None)

    p_check = sub.add_parser("check", help="decide ABox consistency")
    common(p_check)
    p_check.add_argument("--trace", action="store_true",
                         help="include the full derivation")

    p_ask = sub.add_parser("ask", help="answer a query")
    common(p_ask)
    p_ask.add_argument("--trace", action="store_true")
    p_ask.add_argument("--include-synthetic", action="store_true")
    p_ask.add_argument("--neg", action="store_true",
                       help="negate a --rel/--member/--subsume query")
    p_ask.add_argument("--rel", nargs=3, metavar=("LHS", "ROLE", "RHS"))
    p_ask.add_argument("--list-related", nargs=2, metavar=("NAME", "ROLE"))
    p_ask.add_argument("--side", default=None,
                       help="left|right for --list-related, extent|intent for --list-members")
    p_ask.add_argument("--member", nargs=2, metavar=("NAME", "CONCEPT"))
    p_ask.add_argument("--list-members", nargs=1, metavar="CONCEPT")
    p_ask.add_argument("--subsume", nargs=2, metavar=("C1", "C2"))
    p_ask.add_argument("--disj", action="append", metavar="TERM",
                       help="repeatable positive term; true if any is entailed")
    p_ask.add_argument("--sep", nargs=3, metavar=("ROLE", "FIRST", "SECOND"))
    p_ask.add_argument("--sep-rel", nargs=3, metavar=("LHSROLE", "RHSROLE", "PIVOT"))
    p_ask.add_argument("--dif", nargs=2, metavar=("FIRST", "SECOND"))
    p_ask.add_argument("--role", default="I",
                       help="role for --dif (default I)")
    p_ask.add_argument("--identity", nargs=2, metavar=("FIRST", "SECOND"))
    p_ask.add_argument("--equiv", metavar="OTHER_KB")
    p_ask.add_argument("--batch", metavar="FILE",
                       help="file of ask argument lines, one query per line")

    p_model = sub.add_parser("model", help="export the saturated model")
    common(p_model)
    p_model.add_argument("--csv", action="store_true",
                         help="incidence table instead of JSON")

    p_trace = sub.add_parser("trace", help="dump the derivation")
    common(p_trace)
    return ap


def _emit(payload: dict, fmt: str, text_lines):
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def _load(path: str) -> KnowledgeBase:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kb(fh.read())


def _steps_lines(steps):
    return [f"  {i + 1}. [{s['rule']}] {', '.join(s['premises'])} "
            f"=> {s['added']}" for i, s in enumerate(steps)]


def _cmd_check(args) -> int:
    kb = _load(args.kb)
    engine = QueryEngine(kb, max_steps=args.max_steps)
    comp = engine.completion
    status = "consistent" if comp.is_consistent else "inconsistent"
    payload = {
        "command": "check",
        "status": status,
        "input_assertions": len(comp.input_assertions),
        "completion_size": len(comp.assertions),
        "rule_applications": dict(sorted(comp.stats.items())),
    }
    lines = [status,
             f"input assertions: {payload['input_assertions']}",
             f"completion size: {payload['completion_size']}"]
    if comp.clash is not None:
        term, negation = comp.clash
        steps = [{"rule": r, "premises": [str(p) for p in prem],
                  "added": str(c)} for r, prem, c in comp.clash_certificate()]
        payload["clash"] = {"term": str(term), "negation": str(negation),
                            "steps": steps}
        lines.append(f"clash: {term} vs {negation}")
        lines.extend(_steps_lines(steps))
    else:
        payload["clash"] = None
    if args.trace:
        payload["trace"] = [{"rule": r, "premises": [str(p) for p in prem],
                             "added": str(c)} for r, prem, c in comp.steps()]
    _emit(payload, args.format, lines)
    return 0 if comp.is_consistent else 1


def _parse_role(text: str) -> Role:
    return Role.parse(text)


def _run_ask_query(args, kb: KnowledgeBase, engine: QueryEngine) -> dict:
    side = args.side
    if args.rel:
        lhs = parse_individual(args.rel[0], kb)
        role = _parse_role(args.rel[1])
        rhs = parse_individual(args.rel[2], kb)
        if args.neg:
            ans = engine.ask_negative_relational(S.rel(role, lhs, rhs))
            query = {"type": "negative-relational",
                     "term": str(S.rel(role, lhs, rhs))}
        else:
            ans = engine.ask_relational(lhs, role, rhs)
            query = {"type": "relational", "term": str(S.rel(role, lhs, rhs))}
    elif args.list_related:
        anchor = parse_individual(args.list_related[0], kb)
        role = _parse_role(args.list_related[1])
        ans = engine.list_related(anchor, role, side or "right",
                                  include_synthetic=args.include_synthetic)
        query = {"type": "list-related", "anchor": str(anchor),
                 "role": str(role), "side": side or "right"}
    elif args.member:
        ind = parse_individual(args.member[0], kb)
        concept = parse_concept(args.member[1], kb)
        if args.neg:
            ans = engine.ask_negative_membership(ind, concept)
            query = {"type": "negative-membership", "individual": str(ind),
                     "concept": str(concept)}
        else:
            ans = engine.ask_membership(ind, concept)
            query = {"type": "membership", "individual": str(ind),
                     "concept": str(concept)}
    elif args.list_members:
        concept = parse_concept(args.list_members[0], kb)
        ans = engine.list_members(concept, side or "extent",
                                  include_synthetic=args.include_synthetic)
        query = {"type": "list-members", "concept": str(concept),
                 "side": side or "extent"}
    elif args.subsume:
        c1 = parse_concept(args.subsume[0], kb)
        c2 = parse_concept(args.subsume[1], kb)
        if args.neg:
            ans = engine.ask_negative_subsumption(c1, c2)
            query = {"type": "negative-subsumption", "c1": str(c1), "c2": str(c2)}
        else:
            ans = engine.ask_subsumption(c1, c2)
            query = {"type": "subsumption", "c1": str(c1), "c2": str(c2)}
    elif args.disj:
        terms = [parse_term(t, kb) for t in args.disj]
        ans = engine.ask_disjunctive(terms)
        query = {"type": "disjunctive", "terms": [str(t) for t in terms]}
    elif args.sep:
        role = _parse_role(args.sep[0])
        first = parse_individual(args.sep[1], kb)
        second = parse_individual(args.sep[2], kb)
        ans = engine.ask_separation(first, second, role)
        query = {"type": "separation", "role": str(role),
                 "first": str(first), "second": str(second)}
    elif args.sep_rel:
        lhs = _parse_role(args.sep_rel[0])
        rhs = _parse_role(args.sep_rel[1])
        pivot = parse_individual(args.sep_rel[2], kb)
        ans = engine.ask_relation_separation(lhs, rhs, pivot)
        query = {"type": "relation-separation", "lhs": str(lhs),
                 "rhs": str(rhs), "pivot": str(pivot)}
    elif args.dif:
        first = parse_individual(args.dif[0], kb)
        second = parse_individual(args.dif[1], kb)
        ans = engine.ask_differentiation(first, second, _parse_role(args.role))
        query = {"type": "differentiation", "first": str(first),
                 "second": str(second), "role": args.role}
    elif args.identity:
        first = parse_individual(args.identity[0], kb)
        second = parse_individual(args.identity[1], kb)
        ans = engine.ask_identity(first, second)
        query = {"type": "identity-distinguishable", "first": str(first),
                 "second": str(second)}
    elif args.equiv:
        other = QueryEngine(_load(args.equiv), max_steps=args.max_steps)
        ans = engine.ask_equivalence(other)
        query = {"type": "equivalence", "other": args.equiv}
    else:
        raise PolardlError("no query flag given")
    payload = {"command": "ask", "query": query, "answer": ans.value}
    if args.trace and ans.certificate is not None:
        payload["certificate"] = ans.certificate
    return payload


def _cmd_ask(args) -> int:
    kb = _load(args.kb)
    engine = QueryEngine(kb, max_steps=args.max_steps)
    if args.batch:
        ap = _arg_parser()
        with open(args.batch, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh
                     if ln.strip() and not ln.strip().startswith("#")]
        for line in lines:
            sub = ap.parse_args(["ask", args.kb] + shlex.split(line))
            sub.format = args.format
            payload = _run_ask_query(sub, kb, engine)
            print(json.dumps(payload, sort_keys=True))
        return 0
    payload = _run_ask_query(args, kb, engine)
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(json.dumps(payload["answer"], sort_keys=True))
        if args.trace and "certificate" in payload:
            cert = payload["certificate"]
            if cert.get("kind") == "clash":
                print("clash derivation:")
                for line in _steps_lines(cert["steps"]):
                    print(line)
            else:
                print(json.dumps(cert, sort_keys=True))
    return 0


def _cmd_model(args) -> int:
    kb = _load(args.kb)
    engine = QueryEngine(kb, max_steps=args.max_steps)
    m = build_model(engine.completion)
    if args.csv:
        sys.stdout.write(model_to_csv(m))
    else:
        payload = {"command": "model"}
        payload.update(model_to_dict(m))
        print(json.dumps(payload, sort_keys=True, indent=2))
    return 0


def _cmd_trace(args) -> int:
    kb = _load(args.kb)
    engine = QueryEngine(kb, max_steps=args.max_steps)
    for rule, premises, conclusion in engine.completion.steps():
        print(json.dumps({"rule": rule,
                          "premises": [str(p) for p in premises],
                          "added": str(conclusion)}, sort_keys=True))
    return 0


def main(argv=None) -> int:
    args = _arg_parser().parse_args(argv)
    try:
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "ask":
            return _cmd_ask(args)
        if args.command == "model":
            return _cmd_model(args)
        return _cmd_trace(args)
    except (PolardlError, OSError) as exc:
        if getattr(args, "format", "text") == "json":
            print(json.dumps({"error": {"type": type(exc).__name__,
                                        "message": str(exc)}}, sort_keys=True))
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
