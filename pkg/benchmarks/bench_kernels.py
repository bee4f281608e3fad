#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the CSR sparse-dense product, multi-source BFS, and a full
propagation loop on random graphs of growing size, and prints one table
per kernel. Run from the repository root:

    python benchmarks/bench_kernels.py [--sizes 1000,10000,100000]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lerp._kernels import _pyref
from lerp.graph import SparseGraph, normalize_random_walk
from lerp.propagation import PropagationParams, lerp_inner_iterate

try:
    from lerp._kernels import _csr

    BACKENDS = [("cython", _csr), ("numpy", _pyref)]
except ImportError:
    print("compiled kernels unavailable; timing the numpy fallback only")
    BACKENDS = [("numpy", _pyref)]


def random_graph(n, avg_degree, rng):
    """Random multigraph-ish edge sample, deduplicated by construction."""
    m = n * avg_degree // 2
    u = rng.integers(0, n, size=m)
    v = rng.integers(0, n, size=m)
    keep = u != v
    return SparseGraph.from_edges(n, u[keep], v[keep])


def timeit(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_spmv(sizes, columns, rng):
    print(f"\nCSR x dense product ({columns} columns), best of 5 [ms]")
    header = "nodes      nnz        " + "".join(f"{name:>12}" for name, _ in BACKENDS)
    print(header)
    for n in sizes:
        g = random_graph(n, 10, rng)
        view = normalize_random_walk(g)
        x = np.ascontiguousarray(rng.standard_normal((n, columns)))
        row = f"{n:<10d} {g.num_entries:<10d}"
        for _, impl in BACKENDS:
            t = timeit(lambda: impl.spmv(g.indptr, g.indices, view.values, x))
            row += f"{1e3 * t:>12.3f}"
        print(row)


def bench_bfs(sizes, rng):
    print("\nmulti-source BFS (10 sources), best of 5 [ms]")
    print("nodes      " + "".join(f"{name:>12}" for name, _ in BACKENDS))
    for n in sizes:
        g = random_graph(n, 10, rng)
        sources = rng.choice(n, size=10, replace=False).astype(np.int64)
        row = f"{n:<10d}"
        for _, impl in BACKENDS:
            t = timeit(lambda: impl.multi_source_bfs(g.indptr, g.indices,
                                                     sources))
            row += f"{1e3 * t:>12.3f}"
        print(row)


def bench_propagation(sizes, rng):
    import lerp._kernels as kernels

    print("\n10-step anchored propagation (7 classes), best of 3 [ms]")
    print("nodes      " + "".join(f"{name:>12}" for name, _ in BACKENDS))
    for n in sizes:
        g = random_graph(n, 10, rng)
        view = normalize_random_walk(g)
        f = rng.random((n, 7)) + 1e-3
        f /= f.sum(axis=1, keepdims=True)
        params = PropagationParams(beta=0.9, max_iter=10, tol=0.0)
        row = f"{n:<10d}"
        for _, impl in BACKENDS:
            kernels.spmv = impl.spmv  # route the library through this backend
            t = timeit(lambda: lerp_inner_iterate(view, f, f, params,
                                                  validate=False), repeats=3)
            row += f"{1e3 * t:>12.3f}"
        print(row)
    kernels.spmv = kernels._impl.spmv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1000,10000,100000",
                        help="comma-separated node counts")
    parser.add_argument("--columns", type=int, default=16,
                        help="dense matrix width for the product benchmark")
    args = parser.parse_args()
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    rng = np.random.default_rng(0)
    bench_spmv(sizes, args.columns, rng)
    bench_bfs(sizes, rng)
    bench_propagation(sizes, rng)


if __name__ == "__main__":
    main()
