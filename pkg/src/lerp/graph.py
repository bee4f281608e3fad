"""Sparse undirected graphs in CSR form.

Provides the storage type, the row-normalized (random-walk) view used for
neighborhood averaging, repeated-hop aggregation, multi-source BFS hop
distances, and brute-force kNN graph construction.
"""

from __future__ import annotations

import numpy as np

from . import _kernels


class GraphFormatError(ValueError):
    """Raised for malformed edge-list files or invalid CSR structure."""


class SparseGraph:
    """Undirected weighted graph stored in compressed sparse row form.

    Parameters
    ----------
    n : int
        Number of nodes.
    indptr : (n+1,) int64 array
        Row offsets into ``indices``/``weights``.
    indices : (nnz,) int64 array
        Column index of each stored entry, sorted within each row.
    weights : (nnz,) float64 array
        Positive weight of each stored entry.
    validate : bool, optional
        Check symmetry, positivity, and ordering on construction.

    Notes
    -----
    Instances are immutable by convention and safe to share across
    threads. The degree vector (row sums of the weight matrix) is cached
    at construction.
    """

    def __init__(self, n, indptr, indices, weights, validate=True):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        counts = np.diff(self.indptr)
        rows = np.repeat(np.arange(self.n), counts)
        self.degree = np.bincount(rows, weights=self.weights, minlength=self.n)
        if validate:
            self.validate()

    @classmethod
    def from_edges(cls, n, u, v, w=None):
        """Build a symmetric graph from undirected edge endpoints.

        Each (u, v) pair contributes entries in both directions (one
        entry for a self loop); duplicate entries are collapsed by
        summing their weights.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if w is None:
            w = np.ones(u.shape[0], dtype=np.float64)
        else:
            w = np.asarray(w, dtype=np.float64)
        if u.shape != v.shape or u.shape != w.shape:
            raise GraphFormatError("edge arrays must have matching lengths")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise GraphFormatError(f"edge endpoint out of range for n={n}")
        off_diag = u != v
        rows = np.concatenate([u, v[off_diag]])
        cols = np.concatenate([v, u[off_diag]])
        vals = np.concatenate([w, w[off_diag]])
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            new = np.empty(rows.size, dtype=bool)
            new[0] = True
            new[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            starts = np.flatnonzero(new)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols, vals)

    @classmethod
    def from_dense(cls, a):
        """Build from a dense symmetric weight matrix (test convenience)."""
        a = np.asarray(a, dtype=np.float64)
        rows, cols = np.nonzero(a)
        keep = rows <= cols
        return cls.from_edges(a.shape[0], rows[keep], cols[keep],
                              a[rows[keep], cols[keep]])

    @property
    def num_entries(self):
        return int(self.indices.shape[0])

    def neighbors(self, i):
        """Column indices stored in row ``i``."""
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def to_dense(self):
        """Dense weight matrix (small graphs / oracles only)."""
        a = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        a[rows, self.indices] = self.weights
        return a

    def validate(self):
        """Check CSR structure, positive weights, and symmetry."""
        if self.indptr.shape[0] != self.n + 1 or self.indptr[0] != 0:
            raise GraphFormatError("malformed row offsets")
        if self.indptr[-1] != self.indices.shape[0]:
            raise GraphFormatError("row offsets do not cover all entries")
        if np.any(np.diff(self.indptr) < 0):
            raise GraphFormatError("row offsets must be non-decreasing")
        if self.indices.size:
            if self.indices.min() < 0 or self.indices.max() >= self.n:
                raise GraphFormatError("column index out of range")
        if np.any(self.weights <= 0):
            raise GraphFormatError("all edge weights must be positive")
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        order = np.lexsort((rows, self.indices))
        if not (np.array_equal(self.indices[order], rows)
                and np.array_equal(rows[order], self.indices)
                and np.allclose(self.weights[order], self.weights,
                                rtol=0, atol=0)):
            raise GraphFormatError("graph is not symmetric")

    def __repr__(self):
        return f"SparseGraph(n={self.n}, entries={self.num_entries})"


class NormalizedView:
    """Random-walk normalized view of a graph.

    Holds the entries of the row-stochastic neighbor-averaging matrix
    (each stored weight divided by its row's degree) over the same
    sparsity pattern as the underlying graph. Rows of isolated nodes are
    all zero; their indices are listed in ``isolated``.
    """

    def __init__(self, graph, values, isolated):
        self.graph = graph
        self.values = values
        self.isolated = isolated

    @property
    def n(self):
        return self.graph.n

    def propagate(self, x):
        """One neighbor-averaging step applied to a dense (n, k) signal."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != self.n:
            raise ValueError(f"signal must be 2-D with {self.n} rows")
        return _kernels.spmv(self.graph.indptr, self.graph.indices,
                             self.values, x)

    def smoothness(self, f):
        """Quadratic smoothness penalty of ``f`` under I minus the
        averaging matrix, evaluated edge-wise without densifying."""
        f = np.asarray(f, dtype=np.float64)
        return float((f * (f - self.propagate(f))).sum())

    def to_dense(self):
        """Dense neighbor-averaging matrix (small graphs / oracles only)."""
        a = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.graph.indptr))
        a[rows, self.graph.indices] = self.values
        return a


def normalize_random_walk(graph):
    """Divide each row of the weight matrix by its degree.

    Rows with degree zero are left all-zero rather than raising; the
    isolated nodes are reported on the returned view.
    """
    isolated = np.flatnonzero(graph.degree == 0)
    scale = np.where(graph.degree > 0, graph.degree, 1.0)
    rows = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    values = graph.weights / scale[rows]
    return NormalizedView(graph, values, isolated)


def hop_aggregate(view, signal, hops):
    """Column-wise stack of 0..hops neighbor-averaging powers of a signal.

    Parameters
    ----------
    view : NormalizedView
    signal : (n,) or (n, k) array
    hops : int
        Highest power; each step is one sparse product, matrix powers are
        never materialized.

    Returns
    -------
    (n, k*(hops+1)) float64 array
        Blocks ordered by power, the 0th block being the signal itself.
    """
    if hops < 0:
        raise ValueError("hop count must be non-negative")
    signal = np.asarray(signal, dtype=np.float64)
    if signal.ndim == 1:
        signal = signal[:, None]
    if signal.shape[0] != view.n:
        raise ValueError(
            f"signal has {signal.shape[0]} rows, graph has {view.n} nodes")
    blocks = [signal.copy()]
    for _ in range(hops):
        blocks.append(view.propagate(blocks[-1]))
    return np.hstack(blocks)


def hop_distances(graph, sources):
    """Minimum hop count from any source to every node.

    Unweighted multi-source BFS; unreachable nodes get ``inf``.
    """
    sources = np.asarray(sources, dtype=np.int64).ravel()
    if sources.size == 0:
        raise ValueError("source set must be non-empty")
    if sources.min() < 0 or sources.max() >= graph.n:
        raise ValueError("source index out of range")
    raw = _kernels.multi_source_bfs(graph.indptr, graph.indices, sources)
    dist = raw.astype(np.float64)
    dist[raw < 0] = np.inf
    return dist


def knn_graph(points, k, weights="unit"):
    """Symmetrized k-nearest-neighbor graph under Euclidean distance.

    Each node selects its ``k`` nearest other nodes (ties broken by lower
    node index); an edge is kept if either endpoint selected the other.
    Edge weights are 1.0 by default; ``weights="distance"`` stores the
    Euclidean distance instead, which requires all connected pairs to be
    distinct points.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if not np.all(np.isfinite(points)):
        raise ValueError("points must be finite")
    n = points.shape[0]
    if k <= 0:
        raise ValueError("k must be positive")
    if k >= n:
        raise ValueError(f"k={k} must be smaller than the number of points {n}")
    if weights not in ("unit", "distance"):
        raise ValueError(f"unknown weight mode {weights!r}")
    sq = (points ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (points @ points.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    # Stable sort keeps the lower index first among equal distances.
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    src = np.repeat(np.arange(n), k)
    dst = nearest.ravel()
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    pairs = np.unique(lo * n + hi)
    u, v = pairs // n, pairs % n
    if weights == "distance":
        w = np.sqrt(d2[u, v])
        if np.any(w <= 0):
            raise ValueError(
                "distance weights require distinct connected points")
    else:
        w = np.ones(u.shape[0])
    return SparseGraph.from_edges(n, u, v, w)


def read_edge_list(path, n=None):
    """Read a graph from text: one ``u v [w]`` line per undirected edge.

    Lines starting with ``#`` and blank lines are ignored; duplicate
    edges are collapsed by summing weights. ``n`` defaults to the highest
    endpoint plus one.
    """
    us, vs, ws = [], [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise GraphFormatError(
                    f"{path}:{lineno}: expected 'u v [w]', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError as exc:
                raise GraphFormatError(f"{path}:{lineno}: {exc}") from None
            if u < 0 or v < 0:
                raise GraphFormatError(
                    f"{path}:{lineno}: node indices must be non-negative")
            us.append(u)
            vs.append(v)
            ws.append(w)
    if n is None:
        n = max(max(us, default=-1), max(vs, default=-1)) + 1
    return SparseGraph.from_edges(n, us, vs, ws)


def write_edge_list(graph, path):
    """Write each undirected edge once as ``u v w``."""
    rows = np.repeat(np.arange(graph.n), np.diff(graph.indptr))
    keep = rows <= graph.indices
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in zip(rows[keep], graph.indices[keep],
                           graph.weights[keep]):
            fh.write(f"{u} {v} {float(w)!r}\n")
