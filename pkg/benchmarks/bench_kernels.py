#!/usr/bin/env python3
"""Benchmark the box-feasibility kernel: numba @njit vs pure-Python/NumPy.

The kernel decides membership systems `M beta = q, beta in [-1,1]^m` and is
the hot path of the containment audits (millions of solves per run). The
pure path is what you get with REACHSTL_NUMBA=0 or without numba installed.

Usage: python benchmarks/bench_kernels.py [--batch N]
"""

import argparse
import time

import numpy as np

from reachstl import kernels


def make_batch(rng, r, m, n, feasible_fraction=0.7):
    M = rng.normal(size=(r, m))
    Q = np.empty((n, r))
    for i in range(n):
        if rng.random() < feasible_fraction:
            Q[i] = M @ rng.uniform(-1, 1, m)
        else:
            Q[i] = rng.normal(size=r) * 8
    return M, Q


def run(fn, M, Q, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(M, Q, 1e-9, kernels.max_iterations(*M.shape))
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=20000)
    args = ap.parse_args()
    rng = np.random.default_rng(0)

    print(f"numba enabled: {kernels.NUMBA_ENABLED}")
    shapes = [(2, 6), (4, 12), (6, 24), (8, 40)]
    print(f"{'rows x cols':>12} {'jit (us/solve)':>16} {'pure (us/solve)':>16} "
          f"{'speedup':>8}")
    for r, m in shapes:
        M, Q = make_batch(rng, r, m, args.batch)
        if kernels.NUMBA_ENABLED:
            kernels.box_feasible_batch(M, Q[:10], 1e-9,
                                       kernels.max_iterations(r, m))  # warm up
            t_jit, out_jit = run(kernels.box_feasible_batch, M, Q)
        else:
            t_jit, out_jit = None, None
        n_pure = max(args.batch // 40, 200)
        t_pure, out_pure = run(kernels.box_feasible_batch_py, M, Q[:n_pure],
                               repeat=1)
        per_pure = t_pure / n_pure * 1e6
        if t_jit is not None:
            per_jit = t_jit / args.batch * 1e6
            assert np.array_equal(out_jit[:n_pure], out_pure)
            print(f"{r:>5} x {m:<5} {per_jit:>16.2f} {per_pure:>16.2f} "
                  f"{per_pure / per_jit:>7.1f}x")
        else:
            print(f"{r:>5} x {m:<5} {'-':>16} {per_pure:>16.2f} {'-':>8}")


if __name__ == "__main__":
    main()
