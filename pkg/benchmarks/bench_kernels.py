"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--reps 5] [--scale 1.0]

Prints one tab-separated row per kernel and size: best time for each backend
and the speedup. Both backends are checked to give identical output first.
"""
import argparse
import time

import numpy as np

from triptrie import _fallback, kernels
from triptrie.synth import random_walk_corpus

try:
    from triptrie import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(scale):
    for n in (2_000, 10_000, 50_000):
        n = max(10, int(n * scale))
        mat = random_walk_corpus(n, 30, seed=1)
        yield "build_levels", f"n={n} l=30", lambda impl, m=mat: kernels.build_levels(m, impl=impl)
    for n in (100, 400):
        n = max(4, int(n * scale))
        mat = random_walk_corpus(n, 30, n_r=8, n_c=8, seed=2)
        yield "pairwise_weighted_hamming", f"n={n} l=30", lambda impl, m=mat: kernels.pairwise_weighted_hamming(m, impl=impl)
    for m in (50, 150):
        m = max(4, int(m * scale))
        rng = np.random.default_rng(3)
        seqs = [rng.integers(1, 40, int(rng.integers(5, 31))) for _ in range(m)]
        yield "pairwise_levenshtein", f"m={m} len<=30", lambda impl, s=seqs: kernels.pairwise_levenshtein(s, impl=impl)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply every problem size")
    args = ap.parse_args(argv)
    if compiled is None:
        raise SystemExit("compiled extension not built; run pip install -e . --no-build-isolation")
    print("kernel\tsize\tcompiled_s\tpython_s\tspeedup")
    for name, size, run in cases(args.scale):
        if not same(run(compiled), run(_fallback)):
            raise SystemExit(f"{name} {size}: backends disagree")
        tc = best_of(lambda: run(compiled), args.reps)
        tp = best_of(lambda: run(_fallback), max(1, args.reps // 2))
        print(f"{name}\t{size}\t{tc:.5f}\t{tp:.5f}\t{tp / tc:.1f}x")


if __name__ == "__main__":
    main()
