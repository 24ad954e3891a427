"""Benchmark the compiled ascent kernel against the pure-Python loop.

Runs the same low-k sweep with both backends, checks the traces agree, and
reports wall times.

    python3 benchmarks/bench_kernels.py [--n 10] [--T 2000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from welfareopt import HAVE_COMPILED
from welfareopt.solver import Box, FixedStep, maximize_lowest_k
from welfareopt.wireless import WirelessUtilityOracle, generate_scenario, parse_qos


def time_backend(oracle, box, k, horizon, schedule, use_kernel, repeat):
    best = math.inf
    run = None
    for _ in range(repeat):
        started = time.perf_counter()
        run = maximize_lowest_k(
            k, oracle, box, np.zeros(oracle.dim), horizon, schedule,
            use_kernel=use_kernel,
        )
        best = min(best, time.perf_counter() - started)
    return best, run


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--T", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    schedule = FixedStep(5 / math.sqrt(args.T))
    box = Box(np.full(args.n, math.log(0.05)), np.zeros(args.n))
    print(f"n={args.n} T={args.T} seed={args.seed} "
          f"(best of {args.repeat} runs per cell)")
    print(f"{'qos':8s} {'k':>3s} {'python':>10s} {'compiled':>10s} "
          f"{'speedup':>8s}  trace")

    for qos_spec in ("log", "neginv:2", "log1p", "id"):
        oracle = WirelessUtilityOracle(
            generate_scenario(args.n, args.seed, parse_qos(qos_spec))
        )
        for k in sorted({1, max(1, args.n // 2), args.n}):
            t_py, run_py = time_backend(
                oracle, box, k, args.T, schedule, False, args.repeat
            )
            if not HAVE_COMPILED:
                print(f"{qos_spec:8s} {k:3d} {t_py:9.4f}s {'-':>10s} {'-':>8s}"
                      "  (compiled kernel not built)")
                continue
            t_ck, run_ck = time_backend(
                oracle, box, k, args.T, schedule, True, args.repeat
            )
            identical = (
                np.array_equal(run_py.thetas, run_ck.thetas)
                and np.array_equal(run_py.welfare, run_ck.welfare)
            )
            print(f"{qos_spec:8s} {k:3d} {t_py:9.4f}s {t_ck:9.4f}s "
                  f"{t_py / t_ck:7.1f}x  "
                  f"{'identical' if identical else 'MISMATCH'}")


if __name__ == "__main__":
    main()
