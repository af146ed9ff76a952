#!/usr/bin/env python3
"""Time the compiled and pure-Python RK4 kernels on the built-in problems.

    python benchmarks/bench_kernel.py [--steps 1000] [--repeat 5]

Prints best-of-N wall time per integration and per full projection solve,
plus the speed-up of the compiled kernel. Also checks that both kernels
return bitwise-identical trajectories.
"""

import argparse
import sys
import time

from shootproj import ivp
from shootproj.ivp import IntegratorConfig, integrate
from shootproj.problems import builtin
from shootproj.shooting import MethodSpec, solve

STARTS = {"paper-ex1": 0.0, "paper-ex2": 5.0, "paper-ex3": 0.0}
SHOT = 0.1  # finite on every built-in


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    if "c" not in ivp.BACKENDS:
        print("compiled kernel not built; only the Python kernel is available", file=sys.stderr)
    cfg = IntegratorConfig(args.steps)
    backends = sorted(ivp.BACKENDS)

    print(f"{'problem':<10} {'task':<10}" + "".join(f" {b + ' [ms]':>12}" for b in backends) + "  speed-up")
    for name, v0 in STARTS.items():
        p = builtin(name)
        trajs = {b: integrate(p.rhs, p.a, p.b, p.u_a, SHOT, cfg, backend=b) for b in backends}
        if len(backends) == 2:
            c, py = trajs["c"], trajs["python"]
            assert c.u.tobytes() == py.u.tobytes() and c.v.tobytes() == py.v.tobytes()

        tasks = {
            "integrate": lambda b: integrate(p.rhs, p.a, p.b, p.u_a, SHOT, cfg, backend=b),
            "solve": lambda b: _solve_with(b, p, v0, cfg),
        }
        for task, fn in tasks.items():
            times = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
            ratio = times["python"] / times["c"] if "c" in times else float("nan")
            print(f"{name:<10} {task:<10}" + "".join(f" {times[b] * 1e3:12.3f}" for b in backends)
                  + f"  {ratio:7.1f}x")


def _solve_with(backend, problem, v0, cfg):
    saved = ivp.BACKEND
    ivp.BACKEND = backend
    try:
        return solve(problem, MethodSpec(), v0, 1e-4, 100, cfg)
    finally:
        ivp.BACKEND = saved


if __name__ == "__main__":
    main()
