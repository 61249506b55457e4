"""Benchmark the compiled kernel core against the numpy fallback.

Workloads mirror the classification pipeline's hot path: 600 stored training
patterns, 300 queries, 9 classes, at the raw-feature width (8) and the fused
hybrid width (21). Run with:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from firenose._kernels import available_backends

REPEATS = 20


def make_workload(n_train=600, n_queries=300, dim=8, n_classes=9, seed=0):
    rng = np.random.default_rng(seed)
    patterns = rng.normal(size=(n_train, dim))
    queries = rng.normal(size=(n_queries, dim))
    sizes = np.full(n_classes, n_train // n_classes)
    sizes[: n_train % n_classes] += 1
    starts = np.concatenate(([0], np.cumsum(sizes))).astype(np.intp)
    return queries, patterns, starts


def best_of(fn, repeats=REPEATS):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def bench_backend(impl, queries, patterns, starts):
    inv = 1.0 / (2.0 * 0.08**2)

    def full_score():
        sq = impl.sq_dists(queries, patterns)
        impl.class_log_sums(sq, starts, inv)

    t_dists = best_of(lambda: impl.sq_dists(queries, patterns))
    sq = impl.sq_dists(queries, patterns)
    t_sums = best_of(lambda: impl.class_log_sums(sq, starts, inv))
    t_full = best_of(full_score)
    return t_dists, t_sums, t_full


def main():
    backends = available_backends()
    if "cython" not in backends:
        print("note: compiled backend unavailable, timing numpy only")
    print(f"{'workload':<22}{'backend':<9}{'sq_dists':>11}{'class_sums':>12}{'full':>11}")
    for dim, label in ((8, "600x300, 8 dims"), (21, "600x300, 21 dims")):
        queries, patterns, starts = make_workload(dim=dim)
        rows = {}
        for name in sorted(backends):
            t = bench_backend(backends[name], queries, patterns, starts)
            rows[name] = t
            print(
                f"{label:<22}{name:<9}"
                f"{t[0] * 1e3:>9.3f} ms{t[1] * 1e3:>9.3f} ms{t[2] * 1e3:>8.3f} ms"
            )
        if {"cython", "numpy"} <= rows.keys():
            speedup = rows["numpy"][2] / rows["cython"][2]
            print(f"{'':<22}compiled speedup on full scoring: {speedup:.2f}x")


if __name__ == "__main__":
    main()
