"""Benchmark the JIT kernels against the pure-numpy fallback.

Both backends are imported directly so one process can time them side by
side, regardless of GEOPROMPT_NUMBA. The JIT path is warmed before timing
so compilation never lands inside a measurement.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from geoprompt.kernels import numpy_impl

try:
    from geoprompt.kernels import numba_impl
except ImportError:
    numba_impl = None


def make_workloads(rng):
    n = 200_000
    xs = rng.uniform(0.0, 800.0, n)
    ys = rng.uniform(0.0, 456.0, n)

    k = 64
    x0 = rng.integers(0, 90, k)
    y0 = rng.integers(0, 50, k)
    extents = np.stack(
        [x0, y0, x0 + rng.integers(1, 10, k), y0 + rng.integers(1, 7, k)], axis=1
    ).astype(np.int64)
    areas = ((extents[:, 2] - extents[:, 0]) * (extents[:, 3] - extents[:, 1])).astype(np.float64)

    m = 600
    ax1 = rng.uniform(0, 700, m)
    ay1 = rng.uniform(0, 400, m)
    boxes_a = np.stack([ax1, ay1, ax1 + rng.uniform(1, 100, m), ay1 + rng.uniform(1, 56, m)], axis=1)
    bx1 = rng.uniform(0, 700, m)
    by1 = rng.uniform(0, 400, m)
    boxes_b = np.stack([bx1, by1, bx1 + rng.uniform(1, 100, m), by1 + rng.uniform(1, 56, m)], axis=1)

    return {
        "corner_bins (200k points)": lambda impl: impl.corner_bins(xs, ys, 800.0, 456.0, 400, 228),
        "min_cover_fill (64 boxes, 100x57)": lambda impl: impl.min_cover_fill(extents, areas, 57, 100),
        "pairwise_iou (600x600)": lambda impl: impl.pairwise_iou(boxes_a, boxes_b),
    }


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    workloads = make_workloads(rng)

    backends = [("numpy", numpy_impl)]
    if numba_impl is not None:
        backends.append(("numba", numba_impl))
        for load in workloads.values():
            load(numba_impl)  # compile before the clock starts

    width = max(len(name) for name in workloads)
    header = f"{'workload':<{width}}  " + "  ".join(f"{name:>10}" for name, _ in backends)
    print(header)
    print("-" * len(header))
    for name, load in workloads.items():
        cells = []
        results = []
        for _, impl in backends:
            best = time_call(lambda: load(impl), args.repeats)
            cells.append(f"{best * 1e3:9.3f}ms")
            results.append(load(impl))
        row = f"{name:<{width}}  " + "  ".join(cells)
        if len(results) == 2 and not np.array_equal(results[0], results[1]):
            row += "  MISMATCH"
        print(row)
    if numba_impl is None:
        print("\nJIT backend unavailable; only the numpy fallback was timed.")


if __name__ == "__main__":
    main()
