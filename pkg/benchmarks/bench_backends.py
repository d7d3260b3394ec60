#!/usr/bin/env python3
"""Benchmark the compiled sweep kernel against the pure-numpy fallback.

Runs the greedy solver on identical seeded instances under each available
backend, reports per-sweep times and the speedup, and cross-checks that both
backends return the same applied permutations and objectives.

Usage: python benchmarks/bench_backends.py [--lengths 31 64 128 256] [--repeats 3]
"""

import argparse
import time

import numpy as np

from permsolve import (
    SolverConfig,
    SparseSpec,
    apply_frequency_permutations,
    available_backends,
    generate_sparse_matrix,
    greedy_solve,
    random_permutation_sequence,
)


def bench_instance(L, k, repeats, backend):
    A = generate_sparse_matrix(2, 2, L, SparseSpec(k=k), seed=1234)
    s = random_permutation_sequence(L, 2, seed=99)
    a_tilde = apply_frequency_permutations(A, s)
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = greedy_solve(a_tilde, SolverConfig(p=1.9), backend=backend)
        best = min(best, (time.perf_counter() - t0) / result.sweeps)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lengths", type=int, nargs="+", default=[31, 64, 128, 256])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    header = f"{'L':>6} {'k':>4}" + "".join(f" {b + ' (ms/sweep)':>22}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)

    for L in args.lengths:
        k = max(1, L // 16)
        times = {}
        results = {}
        for b in backends:
            times[b], results[b] = bench_instance(L, k, args.repeats, b)
        row = f"{L:>6} {k:>4}" + "".join(f" {times[b] * 1e3:>22.3f}" for b in backends)
        if len(backends) == 2:
            fast, slow = sorted(times.values())
            row += f" {slow / fast:>8.1f}x"
        print(row)
        if len(backends) == 2:
            a, b = (results[x] for x in backends)
            assert np.array_equal(a.applied.perms, b.applied.perms), "backends disagree on permutations"
            assert abs(a.final_objective - b.final_objective) <= 1e-12 * max(a.final_objective, 1.0), (
                "backends disagree on the final objective"
            )
    print("cross-check: backends agree on applied permutations and objectives")


if __name__ == "__main__":
    main()
