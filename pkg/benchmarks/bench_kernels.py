#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Runs the three training hot loops (batch forward pass, gradient accumulation,
Adam update) on a synthetic CSR workload shaped like real training batches
and prints per-call timings plus the speedup of the compiled backend.

    python3 benchmarks/bench_kernels.py --features 100000 --rows 64
"""

import argparse
import time

import numpy as np

from webtriage.kernels import available_backends


def build_workload(rng, n_rows, n_features, nnz_per_row):
    lengths = np.full(n_rows, nnz_per_row)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(lengths)
    indices = np.concatenate([
        np.sort(rng.choice(n_features, size=nnz_per_row, replace=False))
        for _ in range(n_rows)]).astype(np.int64)
    data = rng.uniform(-1.0, 1.0, size=len(indices))
    y = rng.integers(0, 2, size=n_rows).astype(np.float64)
    sample_weight = np.where(y == 1.0, 1.0, 0.5)
    theta = rng.normal(scale=0.1, size=n_features + 1)
    return indptr, indices, data, y, sample_weight, theta


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--features", type=int, default=100_000)
    parser.add_argument("--rows", type=int, default=64, help="batch size")
    parser.add_argument("--nnz", type=int, default=12, help="nonzeros per row")
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    if "c" not in backends:
        print("note: compiled backend not built; run pip install -e . first")

    rng = np.random.default_rng(args.seed)
    indptr, indices, data, y, sw, theta = build_workload(
        rng, args.rows, args.features, args.nnz)
    grad = np.zeros(args.features + 1)
    m = np.zeros(args.features + 1)
    v = np.zeros(args.features + 1)

    print(f"workload: {args.rows} rows x {args.features} features, "
          f"{args.nnz} nnz/row, best of {args.repeats}")
    results = {}
    for name, impl in sorted(backends.items()):
        probs = impl.predict_probs(indptr, indices, data, theta)
        timings = {
            "predict_probs": time_call(
                lambda: impl.predict_probs(indptr, indices, data, theta), args.repeats),
            "accumulate_gradient": time_call(
                lambda: impl.accumulate_gradient(indptr, indices, data, y, sw, probs, grad),
                args.repeats),
            "adam_update": time_call(
                lambda: impl.adam_update(theta.copy(), m, v, grad, 1, 1e-2, 0.99, 0.999, 1e-8),
                args.repeats),
        }
        results[name] = timings
        for op, seconds in timings.items():
            print(f"  {name:>7}  {op:<20} {seconds * 1e6:10.1f} us")

    if {"c", "python"} <= results.keys():
        print("speedup (python / c):")
        for op in results["c"]:
            ratio = results["python"][op] / results["c"][op]
            print(f"  {op:<20} {ratio:6.1f}x")


if __name__ == "__main__":
    main()
