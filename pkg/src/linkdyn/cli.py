"""Command-line front end: `linkdyn run|shed-check|normalize|dot|selftest`."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .axioms import SMALL_UNIVERSE, run_axiom_suite
from .dla import check_link, format_linkage, infer_universe, normalize, parse_term, term_links
from .services import dlds, dldss, run
from .shedding import DEFAULT_BOUND, BoundExceeded, shok_member
from .threads import DLD
from .workspace import (
    format_garbage,
    garbage_report,
    load_workspace,
    to_dot,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EXHAUSTED = 2


class _Exhausted(Exception):
    pass


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {n}")
    return n


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linkdyn", description="Data linkage dynamics with shedding.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute a workspace's thread against a data linkage service")
    r.add_argument("workspace")
    r.add_argument("--service", choices=("plain", "shed"), default="plain")
    r.add_argument("--states", action="store_true", help="print the state after each event")
    r.add_argument("--fuel", type=_positive, help="step limit (default: the workspace's, else 10000)")
    r.add_argument("--bound", type=_positive, default=DEFAULT_BOUND,
                   help="pair limit for each shedding decision")
    r.add_argument("--garbage", action="store_true", help="append per-step garbage counts")

    s = sub.add_parser("shed-check", help="decide whether the first action may shed")
    s.add_argument("workspace")
    s.add_argument("--bound", type=_positive, default=DEFAULT_BOUND)

    n = sub.add_parser("normalize", help="evaluate a data linkage term to canonical links")
    n.add_argument("term")
    n.add_argument("--workspace", help="take the universe (and its name order) from this workspace")

    d = sub.add_parser("dot", help="Graphviz rendering of a workspace's initial state")
    d.add_argument("workspace")
    d.add_argument("--term", help="render this term over the workspace universe instead")

    t = sub.add_parser("selftest", help="randomized check of the algebra's equations")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--instances", type=_positive, default=1000)
    return p


def _cmd_run(args, out) -> int:
    ws = load_workspace(args.workspace)
    fuel = args.fuel or ws.fuel
    service = dldss(ws.initial, bound=args.bound) if args.service == "shed" else dlds(ws.initial)
    try:
        trace = run(ws.graph(), DLD, service, ws.oracle, fuel)
    except BoundExceeded as exc:
        raise _Exhausted(str(exc)) from None
    print(trace.format(args.states), file=out)
    if args.garbage:
        print(format_garbage(garbage_report([ws.initial] + trace.states)), file=out)
    if trace.exhausted:
        raise _Exhausted(f"fuel of {fuel} steps exhausted")
    return EXIT_OK


def _cmd_shed_check(args, out) -> int:
    ws = load_workspace(args.workspace)
    try:
        verdict = shok_member(ws.graph(), None, ws.initial, bound=args.bound)
    except BoundExceeded as exc:
        raise _Exhausted(str(exc)) from None
    print("\n".join(verdict.lines()), file=out)
    return EXIT_OK


def _term_universe(term, workspace: str | None):
    if workspace is None:
        return infer_universe(term_links(term))
    universe = load_workspace(workspace).universe
    for link in term_links(term):
        check_link(link, universe)
    return universe


def _cmd_normalize(args, out) -> int:
    term = parse_term(args.term)
    universe = _term_universe(term, args.workspace)
    print(format_linkage(normalize(term, universe)), file=out)
    return EXIT_OK


def _cmd_dot(args, out) -> int:
    ws = load_workspace(args.workspace)
    state = ws.initial
    if args.term is not None:
        term = parse_term(args.term)
        for link in term_links(term):
            check_link(link, ws.universe)
        state = normalize(term, ws.universe)
    out.write(to_dot(state))
    return EXIT_OK


def _cmd_selftest(args, out) -> int:
    results = run_axiom_suite(args.seed, args.instances, SMALL_UNIVERSE)
    failed = 0
    for name, (checked, bad, example) in results.items():
        status = "ok" if not bad else "FAIL"
        print(f"{status:4} {name}: {checked - bad}/{checked}", file=out)
        if bad:
            failed += 1
            print(f"     X = {{{example.X}}}  Y = {{{example.Y}}}  Z = {{{example.Z}}}", file=out)
    print(f"{len(results) - failed}/{len(results)} equations hold on every instance (seed {args.seed})", file=out)
    return EXIT_OK if not failed else EXIT_INPUT


_COMMANDS = {
    "run": _cmd_run,
    "shed-check": _cmd_shed_check,
    "normalize": _cmd_normalize,
    "dot": _cmd_dot,
    "selftest": _cmd_selftest,
}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return _COMMANDS[args.command](args, out)
    except _Exhausted as exc:
        print(f"linkdyn: {exc}", file=err)
        return EXIT_EXHAUSTED
    except (ValueError, OSError) as exc:
        print(f"linkdyn: {exc}", file=err)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
