"""Command-line front end: ``shootproj solve|sweep|compare``.

Exit codes: 0 success (solve: converged), 2 solve did not converge,
1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import ivp
from .analysis import sweep
from .ivp import IntegratorConfig
from .problems import BUILTINS, ConfigError, builtin, load
from .shooting import Method, MethodSpec, SolveResult, default_secant_seed, solve

EXIT_OK, EXIT_USAGE, EXIT_NOT_CONVERGED = 0, 1, 2
METHOD_NAMES = [m.value for m in Method]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("problem", nargs="?", help=f"built-in problem: {', '.join(BUILTINS)}")
    p.add_argument("--problem-file", metavar="PATH", help="load the problem from a config file")
    p.add_argument("--steps", type=int, default=1000, help="RK4 steps (default 1000)")
    p.add_argument("--guard", type=float, default=1e8, help="blow-up threshold (default 1e8)")
    p.add_argument("--max-iters", type=int, default=100, help="update limit (default 100)")


def _solver_opts(p):
    p.add_argument("--v0", type=float, default=0.0, help="starting guess for u'(a)")
    p.add_argument("--tol", type=float, default=1e-6, help="stop when |E| < TOL (default 1e-6)")
    p.add_argument("--k", type=float, default=1.0, help="fixed-point slope (default 1)")
    p.add_argument("--seed", type=float, nargs=2, metavar=("V0", "V1"),
                   help="secant seed pair (default V0-0.2 V0)")
    p.add_argument("--fd-step", type=float, default=1e-6, help="Newton finite-difference step")


def build_parser():
    parser = _Parser(prog="shootproj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a problem with one shooting method")
    _common(p)
    _solver_opts(p)
    p.add_argument("--method", choices=METHOD_NAMES, default="projection")
    p.add_argument("--trace-json", metavar="PATH", help="write the iteration trace as JSON")
    p.add_argument("--solution-csv", metavar="PATH", help="write the converged trajectory as CSV")

    p = sub.add_parser("sweep", help="tabulate E(v) on a uniform grid")
    _common(p)
    p.add_argument("--from", dest="v_lo", type=float, required=True)
    p.add_argument("--to", dest="v_hi", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--workers", type=int, default=1, help="threads for independent shots")
    p.add_argument("-o", "--output", metavar="PATH", help="CSV file (default stdout)")

    p = sub.add_parser("compare", help="run all five methods with shared settings")
    _common(p)
    _solver_opts(p)
    p.add_argument("--csv", metavar="PATH", help="also write the table as CSV")
    return parser


def _problem(args):
    if args.problem_file and args.problem:
        raise UsageError("give either a built-in problem name or --problem-file, not both")
    if args.problem_file:
        return load(args.problem_file)
    if not args.problem:
        raise UsageError("no problem given")
    try:
        return builtin(args.problem)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None


def _config(args):
    try:
        return IntegratorConfig(args.steps, args.guard)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _method(name, args):
    try:
        return MethodSpec(Method(name), fixed_slope=args.k,
                          secant_seed=tuple(args.seed) if args.seed else None,
                          fd_step=args.fd_step)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_solver_args(args):
    if not args.tol > 0:
        raise UsageError("--tol must be positive")
    if args.max_iters < 1:
        raise UsageError("--max-iters must be >= 1")


def cmd_solve(args, out=None):
    out = out or sys.stdout
    problem = _problem(args)
    cfg = _config(args)
    _check_solver_args(args)
    method = _method(args.method, args)
    result = solve(problem, method, args.v0, args.tol, args.max_iters, cfg)

    print(f"problem     {problem.name}", file=out)
    print(f"method      {method.name}", file=out)
    print(f"status      {result.status.value}", file=out)
    print(f"iterations  {result.iterations}", file=out)
    print(f"root        {result.root!r}", file=out)
    print(f"final |E|   {abs(result.final_E)!r}", file=out)

    if args.trace_json:
        with open(args.trace_json, "w") as fh:
            json.dump(result.to_json(), fh, indent=2)
    if args.solution_csv:
        if result.final_trajectory is None:
            print("no converged trajectory; solution CSV not written", file=sys.stderr)
        else:
            ivp.write_csv(result.final_trajectory, args.solution_csv)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_sweep(args, out=None):
    out = out or sys.stdout
    problem = _problem(args)
    cfg = _config(args)
    if not args.v_lo < args.v_hi:
        raise UsageError("--from must be less than --to")
    if args.points < 2:
        raise UsageError("--points must be >= 2")
    table = sweep(problem, args.v_lo, args.v_hi, args.points, cfg, workers=args.workers)
    table.write_csv(args.output or out)
    return EXIT_OK


@dataclass(frozen=True)
class CompareRow:
    method: str
    status: str
    iterations: int
    root: float
    final_abs_E: float

    @classmethod
    def from_result(cls, result: SolveResult):
        return cls(result.method, result.status.value, result.iterations,
                   result.root, abs(result.final_E))


def compare(problem, v0, tol, max_iters, cfg, fixed_slope=1.0, secant_seed=None,
            fd_step=1e-6, workers=5):
    methods = [MethodSpec(m, fixed_slope=fixed_slope,
                          secant_seed=secant_seed or default_secant_seed(v0), fd_step=fd_step)
               for m in Method]
    with ThreadPoolExecutor(workers) as pool:
        results = list(pool.map(lambda m: solve(problem, m, v0, tol, max_iters, cfg), methods))
    return [CompareRow.from_result(r) for r in results]


def _fmt(x):
    return "" if isinstance(x, float) and math.isnan(x) else repr(x)


def cmd_compare(args, out=None):
    out = out or sys.stdout
    problem = _problem(args)
    cfg = _config(args)
    _check_solver_args(args)
    _method("secant", args)  # validates --k / --seed
    rows = compare(problem, args.v0, args.tol, args.max_iters, cfg, args.k,
                   tuple(args.seed) if args.seed else None, args.fd_step)

    header = ("method", "status", "iterations", "root", "final_abs_E")
    print(f"{header[0]:<22} {header[1]:<21} {header[2]:>10}  {header[3]:<22} {header[4]}", file=out)
    for r in rows:
        print(f"{r.method:<22} {r.status:<21} {r.iterations:>10}  {_fmt(r.root):<22} {_fmt(r.final_abs_E)}",
              file=out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow((r.method, r.status, r.iterations, _fmt(r.root), _fmt(r.final_abs_E)))
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "compare": cmd_compare}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"shootproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"shootproj: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
