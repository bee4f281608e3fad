"""Pure-numpy reference implementations of the compiled kernels.

Used when the Cython extension is unavailable (or disabled through the
``LERP_NO_EXTENSION`` environment variable) and as the ground truth the
compiled kernels are tested against.
"""

from __future__ import annotations

import numpy as np

# Cap on the scratch buffer used by the gather/reduce SpMV: nnz * block
# column chunks of float64, ~128 MiB at this setting.
_BLOCK_ELEMS = 1 << 24


def spmv(indptr: np.ndarray, indices: np.ndarray, data: np.ndarray,
         x: np.ndarray) -> np.ndarray:
    """Row-major CSR times dense matrix: out[i] = sum_j A[i, j] * x[j]."""
    n = indptr.shape[0] - 1
    k = x.shape[1]
    out = np.zeros((n, k), dtype=np.float64)
    nnz = indices.shape[0]
    if nnz == 0 or k == 0:
        return out
    # np.add.reduceat mishandles empty segments, so reduce only at rows
    # that own entries; consecutive non-empty starts bound each segment.
    nonempty = np.flatnonzero(np.diff(indptr) > 0)
    starts = indptr[nonempty]
    block = max(1, min(k, _BLOCK_ELEMS // nnz))
    for lo in range(0, k, block):
        hi = min(k, lo + block)
        contrib = data[:, None] * x[indices, lo:hi]
        out[nonempty, lo:hi] = np.add.reduceat(contrib, starts, axis=0)
    return out


def multi_source_bfs(indptr: np.ndarray, indices: np.ndarray,
                     sources: np.ndarray) -> np.ndarray:
    """Hop counts from the nearest source; -1 marks unreachable nodes."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    frontier = np.unique(sources)
    dist[frontier] = 0
    level = 0
    while frontier.size:
        level += 1
        starts = indptr[frontier]
        counts = indptr[frontier + 1] - starts
        total = int(counts.sum())
        if total == 0:
            break
        # Gather every neighbor of the frontier in one shot.
        offsets = np.arange(total) - np.repeat(counts.cumsum() - counts, counts)
        neighbors = indices[np.repeat(starts, counts) + offsets]
        frontier = np.unique(neighbors[dist[neighbors] < 0])
        dist[frontier] = level
    return dist
