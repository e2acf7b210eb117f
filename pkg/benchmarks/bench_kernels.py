#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

The dominant pipeline cost is the all-pairs min-intersection total over the
per-feature relation stacks, followed by relation construction itself.
Usage: python benchmarks/bench_kernels.py [--features 72] [--rows 400]
"""

import argparse
import time

import numpy as np

from fedmlfs.kernels import _numpy

try:
    from fedmlfs.kernels import _native
except ImportError:
    _native = None


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--features", type=int, default=72)
    parser.add_argument("--rows", type=int, default=400)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cols = rng.random((args.features, args.rows))
    stack = np.stack([_numpy.similarity_matrix(c, 0.3) for c in cols])

    backends = {"numpy": _numpy}
    if _native is not None:
        backends["native"] = _native
    else:
        print("native kernels not built; showing the numpy fallback only")

    workloads = {
        f"similarity_matrix ({args.features} cols x {args.rows} rows)":
            lambda impl: [impl.similarity_matrix(c, 0.3) for c in cols],
        f"pairwise_min_totals ({args.features} x {args.rows}^2)":
            lambda impl: impl.pairwise_min_totals(stack),
        "intersection_row_sums":
            lambda impl: [impl.intersection_row_sums(stack[0], stack[i])
                          for i in range(stack.shape[0])],
    }

    print(f"{'workload':<48}" + "".join(f"{name:>12}" for name in backends)
          + ("     speedup" if _native is not None else ""))
    for label, job in workloads.items():
        times = {name: best_of(lambda impl=impl: job(impl), args.repeats)
                 for name, impl in backends.items()}
        row = f"{label:<48}" + "".join(f"{times[name]*1e3:>10.1f}ms"
                                       for name in backends)
        if _native is not None:
            row += f"{times['numpy'] / times['native']:>11.1f}x"
        print(row)

    if _native is not None:
        drift = np.abs(_native.pairwise_min_totals(stack)
                       - _numpy.pairwise_min_totals(stack)).max()
        print(f"\nmax backend disagreement on totals: {drift:.2e}")


if __name__ == "__main__":
    main()
