#!/usr/bin/env python3
"""Benchmark the compiled queue kernel against the pure-Python fallback.

Both backends consume identical random streams, so besides timing them the
script asserts their outputs are bit-for-bit equal.

Usage: python benchmarks/bench_kernels.py [num_customers] [seed]
"""

import sys
import time

import numpy as np

from priopricing import QueueParams, SimConfig, available_backends, \
    simulate_priority_queue
from priopricing import _kernel as kernel_py

try:
    from priopricing import _kernel_c as kernel_cy
except ImportError:
    kernel_cy = None


def time_kernel(kernel, params, q, n, warmup, seed, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        streams = np.random.SeedSequence(seed).spawn(4)
        bitgens = [np.random.PCG64(s) for s in streams[:3]]
        t0 = time.perf_counter()
        result = kernel.run_queue(params.lam, params.mu, q, n, warmup, bitgens)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv):
    n = int(argv[1]) if len(argv) > 1 else 500_000
    seed = int(argv[2]) if len(argv) > 2 else 7
    params = QueueParams(0.7, 1.0)
    q, warmup = 0.3, n // 100

    print(f"two-class preemptive M/M/1, rho={params.rho:g}, q={q}, "
          f"{n} customers, warmup {warmup}, seed {seed}")
    print(f"available backends: {available_backends()}")

    t_py, res_py = time_kernel(kernel_py, params, q, n, warmup, seed)
    rate = (n - warmup) / t_py
    print(f"python : {t_py:8.3f}s  ({rate / 1e6:.2f}M customers/s)")

    if kernel_cy is None:
        print("cython : extension not built (pip install -e . to compile)")
        return 0

    t_cy, res_cy = time_kernel(kernel_cy, params, q, n, warmup, seed)
    rate = (n - warmup) / t_cy
    print(f"cython : {t_cy:8.3f}s  ({rate / 1e6:.2f}M customers/s)")
    print(f"speedup: {t_py / t_cy:8.1f}x")

    prem_py, soj_py, *rest_py = res_py
    prem_cy, soj_cy, *rest_cy = res_cy
    identical = (np.array_equal(prem_py, prem_cy)
                 and np.array_equal(soj_py, soj_cy)
                 and rest_py == rest_cy)
    print(f"bit-identical outputs: {identical}")
    if not identical:
        return 1

    cfg = SimConfig(params=params, q=q, num_customers=n,
                    warmup_customers=warmup, seed=seed)
    res = simulate_priority_queue(cfg)
    print(f"sanity : premium {res.mean_sojourn_premium:.5f} "
          f"ordinary {res.mean_sojourn_ordinary:.5f} "
          f"(analytic {1 / (1 - q * params.rho):.5f} / "
          f"{1 / ((1 - params.rho) * (1 - q * params.rho)):.5f})")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
