"""Shared fixtures and independent oracle helpers.

The oracles here (dense matrix powers, Floyd-Warshall, brute-force
distance sort) deliberately avoid the library's sparse code paths so the
two routes stay independent.
"""

from __future__ import annotations

import numpy as np
import pytest

from lerp.data import make_blobs
from lerp.graph import SparseGraph, normalize_random_walk


def er_graph(n, p, rng, connected=True):
    """Random symmetric graph; resamples until connected if asked."""
    for _ in range(200):
        upper = np.triu(rng.random((n, n)) < p, 1)
        dense = (upper | upper.T).astype(float)
        g = SparseGraph.from_dense(dense)
        if not connected or _is_connected(dense):
            return g
    raise RuntimeError("could not sample a connected graph")


def _is_connected(dense):
    n = dense.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(dense[u]):
                if not seen[v]:
                    seen[v] = True
                    nxt.append(v)
        frontier = nxt
    return bool(seen.all())


def floyd_warshall(dense):
    """All-pairs unweighted hop distances on a dense adjacency matrix."""
    n = dense.shape[0]
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0.0)
    dist[dense > 0] = 1.0
    for k in range(n):
        dist = np.minimum(dist, dist[:, k:k + 1] + dist[k:k + 1, :])
    return dist


def random_simplex(rng, n, c):
    """Uniformly positive row-stochastic matrix."""
    raw = rng.random((n, c)) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


def chain_graph(n):
    return SparseGraph.from_edges(n, np.arange(n - 1), np.arange(1, n))


@pytest.fixture(scope="session")
def blobs():
    """Separable synthetic dataset shared by the solver tests."""
    return make_blobs(n_per_class=30, c=3, d=4, separation=8.0, seed=11)


@pytest.fixture(scope="session")
def blobs_view(blobs):
    return normalize_random_walk(blobs.graph)
