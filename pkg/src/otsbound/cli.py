"""Command-line front end: ``otsbound {tighten,build,solve,oracle,mopt,compare}``.

Exit codes: 0 success, 1 usage or input error, 2 islanding, 3 infeasible,
4 time limit reached without an incumbent.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from dataclasses import replace

from . import bounds as bnd
from .caseio import FlexibleSpec, load_bundled, parse_matpower, read_case
from .errors import IslandingError, OTSError
from .formulation import CostMode, build_bigm, build_mccormick, default_cost_mode
from .mps import EpigraphStrategy, write_mps
from .network import scale_loads, validate
from .oracle import enumerate_solve, max_angle_difference
from .solver import SolverConfig, Status, solve_mip

logger = logging.getLogger("otsbound")

EXIT_OK, EXIT_USAGE, EXIT_ISLANDING, EXIT_INFEASIBLE, EXIT_TIME_LIMIT = 0, 1, 2, 3, 4
CSV_HEADER = ["case", "load_factor", "r", "bounds", "status", "objective",
              "gap_percent", "nodes", "wall_ms"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- inputs

def _load(args):
    if args.case and args.matpower:
        raise UsageError("give either --case or --matpower, not both")
    if args.matpower:
        spec = FlexibleSpec.parse(args.flexible or "", 0)
        with open(args.matpower) as fh:
            doc = parse_matpower(fh.read(), spec)
        name = os.path.splitext(os.path.basename(args.matpower))[0]
    elif args.case:
        if os.path.exists(args.case):
            doc = read_case(args.case)
            name = os.path.splitext(os.path.basename(args.case))[0]
        else:
            # fall back to a case shipped with the package
            doc = load_bundled(args.case)
            name = args.case
    else:
        raise UsageError("one of --case or --matpower is required")
    network = doc.network
    if getattr(args, "r", None) is not None:
        network = _with_r(network, args.r)
    return name, network


def _with_r(network, r):
    net = replace(network, r=r)
    bad = [v for v in validate(net) if v.kind.startswith(("Negative", "Cardinality"))]
    if bad:
        raise UsageError(bad[0].message)
    return net


def _bounds(network, spec: str, limit: int):
    if spec == "naive":
        return bnd.naive_bounds(network)
    if spec == "shortest-path":
        return bnd.strengthen_bounds(network)
    if spec == "exact":
        return bnd.exact_bounds(network, limit)
    with open(spec) as fh:
        return bnd.BoundSet.from_json(fh.read())


def _model(network, args):
    bset = _bounds(network, args.bounds, args.limit)
    cost = CostMode(args.cost) if args.cost else default_cost_mode(network)
    if args.reform == "mccormick":
        if bset.provenance is not bnd.Provenance.EXACT:
            bset = bnd.mccormick_from_bigm(bset, network)
        return build_mccormick(network, bset, cost)[0]
    return build_bigm(network, bset, cost)[0]


def _config(args) -> SolverConfig:
    return SolverConfig(gap_tolerance_percent=args.gap, time_limit=args.time_limit)


def _write(out, text):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------- commands

def cmd_tighten(args):
    _, network = _load(args)
    _write(args.out, _bounds(network, args.method, args.limit).to_json())
    return EXIT_OK


def cmd_build(args):
    _, network = _load(args)
    model = _model(network, args)
    strategy = EpigraphStrategy.omit() if args.epigraph == "omit" else EpigraphStrategy.secant(args.cuts)
    _write(args.out, write_mps(model, strategy, force=args.force))
    return EXIT_OK


def _report(sol):
    print(f"status: {sol.status.value}")
    print(f"objective: {sol.objective:.10g}")
    print(f"gap_percent: {sol.gap_percent:.6g}")
    print(f"nodes: {sol.node_count}")
    print(f"wall_time: {sol.wall_time:.3f}")


def _exit_for(sol):
    if sol.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    if sol.status is Status.TIME_LIMIT and not sol.has_incumbent:
        return EXIT_TIME_LIMIT
    return EXIT_OK


def cmd_solve(args):
    _, network = _load(args)
    if args.load_factor != 1.0:
        network = scale_loads(network, args.load_factor)
    sol = solve_mip(_model(network, args), _config(args))
    _report(sol)
    return _exit_for(sol)


def cmd_oracle(args):
    _, network = _load(args)
    sol = enumerate_solve(network, CostMode(args.cost) if args.cost else None, args.limit)
    _report(sol)
    if sol.configuration is not None:
        on = ",".join(str(lid) for lid, bit in sorted(sol.configuration.items()) if bit)
        print(f"lines_on: {on}")
        print(f"feasible_configurations: {sol.feasible_count}/{sol.examined}")
    return _exit_for(sol)


def cmd_mopt(args):
    _, network = _load(args)
    line = network.line(args.line)
    delta = max_angle_difference(network, args.line, args.limit)
    if math.isinf(delta):
        print(f"line {args.line}: unbounded (switching it off can island its endpoints)")
        return EXIT_OK
    print(f"line {args.line}: m_opt {line.susceptance * delta:.10g}")
    return EXIT_OK


def _floats(text):
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"malformed list {text!r}") from None


def _ints(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"malformed list {text!r}") from None


def cmd_compare(args):
    name, network = _load(args)
    alphas = _floats(args.load_factors)
    rs = _ints(args.r_values) if args.r_values else [network.r]
    config = _config(args)
    naive = bnd.naive_bounds(network)
    strong = bnd.strengthen_bounds(network)
    cost = CostMode(args.cost) if args.cost else default_cost_mode(network)
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for alpha in alphas:
            for r in rs:
                net = _with_r(scale_loads(network, alpha), r)
                nodes = {}
                for label, bset in (("naive", naive), ("shortest-path", strong)):
                    sol = solve_mip(build_bigm(net, bset, cost)[0], config)
                    nodes[label] = sol.node_count
                    writer.writerow([name, f"{alpha:g}", r, label, sol.status.value,
                                     f"{sol.objective:.10g}", f"{sol.gap_percent:.6g}",
                                     sol.node_count, round(sol.wall_time * 1000)])
                ratio = nodes["naive"] / max(nodes["shortest-path"], 1)
                print(f"load_factor={alpha:g} r={r}: node ratio naive/shortest-path = {ratio:.3f}",
                      file=sys.stderr)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="otsbound", description="DC optimal transmission switching with "
                     "shortest-path big-M bounds.")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def case_args(p, with_r=True):
        p.add_argument("--case", help="native JSON case file, or the name of a bundled case")
        p.add_argument("--matpower", help="MATPOWER .m case file")
        p.add_argument("--flexible", help="flexible lines for --matpower: '3,5,7' or "
                       "'random:SEED:FIXED_COUNT'")
        if with_r:
            p.add_argument("--r", type=int, help="minimum number of flexible lines in service")
        p.add_argument("--limit", type=int, default=16,
                       help="largest flexible-line count enumerated exactly")

    def model_args(p):
        p.add_argument("--bounds", default="shortest-path",
                       help="naive, shortest-path, exact or a BoundSet JSON file")
        p.add_argument("--reform", choices=["bigm", "mccormick"], default="bigm")
        p.add_argument("--cost", choices=[m.value for m in CostMode],
                       help="default: linear unless a generator has a quadratic cost")

    def solver_args(p):
        p.add_argument("--gap", type=float, default=0.1, help="relative gap tolerance in percent")
        p.add_argument("--time-limit", type=float, default=math.inf, help="seconds")

    p = sub.add_parser("tighten", help="compute big-M bounds")
    case_args(p)
    p.add_argument("--method", choices=["naive", "shortest-path", "exact"], default="shortest-path")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_tighten)

    p = sub.add_parser("build", help="export the MIP as fixed-format MPS")
    case_args(p)
    model_args(p)
    p.add_argument("--epigraph", choices=["secant", "omit"], default="secant")
    p.add_argument("--cuts", type=int, default=32, help="tangent cuts per quadratic term")
    p.add_argument("--force", action="store_true", help="allow omitting quadratic terms")
    p.add_argument("--out", help="output file (default: standard output)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve", help="solve with the built-in branch-and-bound")
    case_args(p)
    model_args(p)
    solver_args(p)
    p.add_argument("--load-factor", type=float, default=1.0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="solve by enumerating switch configurations")
    case_args(p)
    p.add_argument("--cost", choices=[m.value for m in CostMode])
    p.set_defaults(func=cmd_oracle, limit=20)

    p = sub.add_parser("mopt", help="smallest valid big-M of one line by enumeration")
    case_args(p, with_r=False)
    p.add_argument("--line", type=int, required=True)
    p.set_defaults(func=cmd_mopt)

    p = sub.add_parser("compare", help="naive against shortest-path bounds over a sweep")
    case_args(p, with_r=False)
    solver_args(p)
    p.add_argument("--cost", choices=[m.value for m in CostMode])
    p.add_argument("--load-factors", default="1.0")
    p.add_argument("--r-values", help="comma-separated r values (default: the case's r)")
    p.add_argument("--out", help="CSV file (default: standard output)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")
    echoed = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k != "func")
    print(f"config: {echoed}", file=sys.stderr)
    try:
        return args.func(args)
    except IslandingError as exc:
        print(f"error: islanding: {exc}", file=sys.stderr)
        return EXIT_ISLANDING
    except (UsageError, OTSError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
