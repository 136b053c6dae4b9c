#!/usr/bin/env python3
"""Benchmark the compiled trajectory stepper against the numpy fallback.

Runs the same seeded three-axis workload through both backends and reports
wall time, steps per second and the largest score discrepancy.  Usage:

    python benchmarks/bench_stepper.py [--n-traj 4000] [--n 20] [--tau 200]
"""

import argparse
import math
import time

import numpy as np

from spindir.backend import HAVE_COMPILED
from spindir.weak import weak3d_run


def time_backend(backend, args):
    started = time.perf_counter()
    curve = weak3d_run(
        args.n, args.delta, args.tau, args.n_traj, args.seed, backend=backend
    )
    elapsed = time.perf_counter() - started
    steps = args.n_traj * args.tau * 3
    return elapsed, steps / elapsed, curve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=20, help="number of qubits")
    parser.add_argument("--delta", type=float, default=None, help="pointer width (default 8 sqrt(N))")
    parser.add_argument("--tau", type=int, default=200, help="rounds per trajectory")
    parser.add_argument("--n-traj", type=int, default=4000)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()
    if args.delta is None:
        args.delta = 8.0 * math.sqrt(args.n)

    print(
        f"workload: N={args.n} delta={args.delta:.2f} tau={args.tau} "
        f"n_traj={args.n_traj} ({args.n_traj * args.tau * 3:,} weak steps)"
    )

    t_py, rate_py, curve_py = time_backend("python", args)
    print(f"python   : {t_py:8.2f} s   {rate_py:12,.0f} steps/s")

    if not HAVE_COMPILED:
        print("compiled : not available (extension not built)")
        return

    t_cy, rate_cy, curve_cy = time_backend("compiled", args)
    print(f"compiled : {t_cy:8.2f} s   {rate_cy:12,.0f} steps/s")
    print(f"speedup  : {t_py / t_cy:8.2f} x")
    print(f"max |G difference| between backends: {np.max(np.abs(curve_py.mean - curve_cy.mean)):.3e}")


if __name__ == "__main__":
    main()
