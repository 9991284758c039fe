"""Command-line surface: solve, verify, envy-graph, gen-hard, verify-dichotomy, closure.

Exit codes are a stable contract:
  0  success (certified result / checks passed)
  1  input error (bad flags, unreadable file, schema violation)
  2  search failure (no certified fixed point within budget)
  3  verification failure (certificate or dichotomy check did not hold)
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .engine import EngineConfig, find_fixed_point
from .envy import build_envy_graph, certify
from .errors import (
    ConfigurationError,
    EmptyDomainError,
    EngineInvariantError,
    EnumerationLimitError,
    MalformedInstanceError,
    MalformedLpError,
    PreconditionError,
    SearchFailedError,
)
from .hard import DisjointnessInput, build_hard_instance, verify_welfare_dichotomy
from .serialize import (
    dump_certificate,
    dump_dichotomy_report,
    dump_instance,
    dump_solve_result,
    dump_trace_record,
    dumps,
    envy_graph_to_dot,
    load_instance,
    load_mixed_allocation,
    mask_to_items,
    parse_rational,
)


class CliError(Exception):
    """Flag or file problem surfaced before any computation ran."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags by default; the exit-code
    # contract reserves 2 for search failures, so flag errors become CliError.
    def error(self, message):
        raise CliError(message)


def _warn(message):
    print(f"warning: {message}", file=sys.stderr)


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}") from exc


def _bits(text):
    if not text or any(c not in "01" for c in text):
        raise CliError(f"expected a string of 0s and 1s, got {text!r}")
    return tuple(int(c) for c in text)


class _TraceWriter:
    """Streams one JSON line per engine iteration."""

    def __init__(self, fh, inst):
        self.fh = fh
        self.inst = inst

    def append(self, rec):
        self.fh.write(json.dumps(dump_trace_record(rec, self.inst)) + "\n")
        self.fh.flush()


def cmd_solve(args):
    inst = load_instance(_read_json(args.instance), strict=args.strict, warn=_warn)
    epsilon = "auto" if args.epsilon == "auto" else parse_rational(args.epsilon)
    cfg = EngineConfig(
        max_iterations=args.max_iters,
        epsilon=epsilon,
        grid_resolution=args.grid,
        jobs=args.jobs,
    )
    trace_fh = open(args.trace, "w") if args.trace else None
    try:
        sink = _TraceWriter(trace_fh, inst) if trace_fh else None
        start = time.perf_counter()
        state, cert = find_fixed_point(inst, cfg, trace_sink=sink)
        wall = time.perf_counter() - start
    finally:
        if trace_fh:
            trace_fh.close()
    sys.stdout.write(dumps(dump_solve_result(state, cert, inst, wall)))
    return 0


def cmd_verify(args):
    inst = load_instance(_read_json(args.instance), warn=_warn)
    p = load_mixed_allocation(_read_json(args.allocation), inst)
    cert = certify(p, inst)
    sys.stdout.write(dumps(dump_certificate(cert, inst)))
    return 0 if cert.ok else 3


def cmd_envy_graph(args):
    inst = load_instance(_read_json(args.instance), warn=_warn)
    p = load_mixed_allocation(_read_json(args.allocation), inst)
    sys.stdout.write(envy_graph_to_dot(build_envy_graph(p, inst)))
    return 0


def cmd_gen_hard(args):
    inp = DisjointnessInput(args.p, _bits(args.x1), _bits(args.x2))
    payload = dumps(dump_instance(build_hard_instance(inp)))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    return 0


def cmd_verify_dichotomy(args):
    inp = DisjointnessInput(args.p, _bits(args.x1), _bits(args.x2))
    report = verify_welfare_dichotomy(inp)
    sys.stdout.write(dumps(dump_dichotomy_report(report)))
    return 0 if report.dichotomy_holds else 3


def cmd_closure(args):
    inst = load_instance(_read_json(args.instance))
    closed = [[mask_to_items(b) for b in a.bundles] for a in inst.allocations]
    sys.stdout.write(dumps(closed))
    return 0


def build_parser():
    parser = _Parser(prog="fairmix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="find a certified efficient envy-free lottery")
    solve.add_argument("--instance", required=True, metavar="F")
    solve.add_argument("--epsilon", default="auto", metavar="Q", help="weight floor, a rational or 'auto'")
    solve.add_argument("--max-iters", type=int, default=64, metavar="N")
    solve.add_argument("--grid", type=int, default=8, metavar="R", help="fallback grid resolution")
    solve.add_argument("--trace", metavar="F", help="write per-iteration JSON lines here")
    solve.add_argument("--jobs", type=int, default=1, metavar="N")
    solve.add_argument("--strict", action="store_true", help="reject allocation lists that need closing")
    solve.set_defaults(func=cmd_solve)

    verify = sub.add_parser("verify", help="certify a given lottery")
    verify.add_argument("--instance", required=True, metavar="F")
    verify.add_argument("--allocation", required=True, metavar="F")
    verify.set_defaults(func=cmd_verify)

    graph = sub.add_parser("envy-graph", help="emit the envy graph in DOT form")
    graph.add_argument("--instance", required=True, metavar="F")
    graph.add_argument("--allocation", required=True, metavar="F")
    graph.set_defaults(func=cmd_envy_graph)

    gen = sub.add_parser("gen-hard", help="generate a two-player intersection-hard instance")
    gen.add_argument("--p", type=int, required=True, metavar="N", help="half-count; m = 2p items")
    gen.add_argument("--x1", required=True, metavar="BITS")
    gen.add_argument("--x2", required=True, metavar="BITS")
    gen.add_argument("--out", metavar="F")
    gen.set_defaults(func=cmd_gen_hard)

    dich = sub.add_parser("verify-dichotomy", help="certify the welfare gap between string cases")
    dich.add_argument("--p", type=int, required=True, metavar="N")
    dich.add_argument("--x1", required=True, metavar="BITS")
    dich.add_argument("--x2", required=True, metavar="BITS")
    dich.set_defaults(func=cmd_verify_dichotomy)

    closure = sub.add_parser("closure", help="emit the swap-closed allocation set")
    closure.add_argument("--instance", required=True, metavar="F")
    closure.set_defaults(func=cmd_closure)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        MalformedInstanceError,
        MalformedLpError,
        EnumerationLimitError,
        PreconditionError,
        ConfigurationError,
        EmptyDomainError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SearchFailedError as exc:
        print(f"search failed: {exc}", file=sys.stderr)
        if exc.best_certificate is not None:
            best = exc.best_certificate
            print(
                f"closest candidate: envy-free={best.ef_ok} efficient={best.pe_ok}",
                file=sys.stderr,
            )
        return 2
    except EngineInvariantError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
