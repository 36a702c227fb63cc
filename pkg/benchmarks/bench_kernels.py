#!/usr/bin/env python3
"""Benchmark the compiled optimization kernels against the numpy fallback.

The alternating-maximization inner loops dominate the verification sweeps
(they run thousands of times per sweep on small dense problems), which is
why they live in the compiled extension.  Run:

    python benchmarks/bench_kernels.py [--repeats 200]

Both implementations are also checked for agreement on every problem.
"""

import argparse
import time

import numpy as np

from dyadlab import _kernels_py

try:
    from dyadlab import _kernels_c
except ImportError:
    _kernels_c = None


def _linear_problem(rng, n):
    b = np.ascontiguousarray(rng.uniform(0, 2, (n, n)))
    s = rng.uniform(0.1, 2, n)
    w = rng.uniform(0.1, 2, n)
    f0 = np.ascontiguousarray(rng.uniform(0.1, 2, n))
    return b, s, w, f0


def _trilinear_problem(rng, depth):
    from dyadlab import DyadicTree

    tree = DyadicTree(depth, 2)
    u = np.ascontiguousarray(tree.anc)
    lam = rng.uniform(0, 2, tree.n_cubes)
    masses = [rng.uniform(0.1, 2, tree.n_leaves) for _ in range(3)]
    fs = [np.ascontiguousarray(rng.uniform(0.1, 2, tree.n_leaves)) for _ in range(3)]
    return u, lam, masses, fs


def bench_linear(impl, problems, repeats):
    start = time.perf_counter()
    value = 0.0
    for _ in range(repeats):
        for b, s, w, f0 in problems:
            v, *_ = impl.alternating_linear(b, s, w, 4.0, 2.0, f0, 200, 1e-10)
            value += v
    return time.perf_counter() - start, value


def bench_trilinear(impl, problems, repeats):
    start = time.perf_counter()
    value = 0.0
    for _ in range(repeats):
        for u, lam, masses, fs in problems:
            v, *_ = impl.alternating_trilinear(
                u, lam, *masses, 4.0, 4.0, 4.0, *fs, 200, 1e-10
            )
            value += v
    return time.perf_counter() - start, value


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    linear_problems = [_linear_problem(rng, n) for n in (8, 16, 32) for _ in range(4)]
    trilinear_problems = [_trilinear_problem(rng, d) for d in (2, 3, 4) for _ in range(2)]

    rows = []
    for name, bench, problems in (
        ("alternating_linear", bench_linear, linear_problems),
        ("alternating_trilinear", bench_trilinear, trilinear_problems),
    ):
        t_py, v_py = bench(_kernels_py, problems, args.repeats)
        if _kernels_c is not None:
            t_c, v_c = bench(_kernels_c, problems, args.repeats)
            assert abs(v_py - v_c) <= 1e-9 * max(abs(v_py), 1.0), "kernel mismatch"
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, float("nan"), float("nan")))

    header = f"{'kernel':24s} {'numpy [s]':>10s} {'compiled [s]':>12s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, t_py, t_c, speedup in rows:
        print(f"{name:24s} {t_py:10.3f} {t_c:12.3f} {speedup:8.2f}")
    if _kernels_c is None:
        print("(compiled extension not available; numpy fallback only)")


if __name__ == "__main__":
    main()
