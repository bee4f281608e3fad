# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernels: sparse-dense products and multi-source BFS.

These are the two inner loops that dominate runtime on large graphs.
Both are single-threaded so results are reproducible bit for bit.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def spmv(const cnp.int64_t[::1] indptr,
         const cnp.int64_t[::1] indices,
         const double[::1] data,
         const double[:, ::1] x):
    """Row-major CSR times dense matrix: out[i] = sum_j A[i, j] * x[j]."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t k = x.shape[1]
    out = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, t, p
    cdef cnp.int64_t j
    cdef double w
    for i in range(n):
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            w = data[p]
            for t in range(k):
                o[i, t] += w * x[j, t]
    return out


def multi_source_bfs(const cnp.int64_t[::1] indptr,
                     const cnp.int64_t[::1] indices,
                     const cnp.int64_t[::1] sources):
    """Hop counts from the nearest source; -1 marks unreachable nodes."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] d = dist
    cdef cnp.int64_t[::1] q = queue
    cdef Py_ssize_t head = 0, tail = 0
    cdef Py_ssize_t i, p
    cdef cnp.int64_t u, v
    for i in range(sources.shape[0]):
        u = sources[i]
        if d[u] < 0:
            d[u] = 0
            q[tail] = u
            tail += 1
    while head < tail:
        u = q[head]
        head += 1
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if d[v] < 0:
                d[v] = d[u] + 1
                q[tail] = v
                tail += 1
    return dist
