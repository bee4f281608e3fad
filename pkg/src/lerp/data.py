"""Dataset ingestion, split sampling, and synthetic fixtures.

A dataset directory holds three UTF-8 text files: ``edges.txt`` (one
``u v [w]`` line per undirected edge), ``features.csv`` (one node per
line, comma-separated floats), and ``labels.txt`` (one class index per
line). ``#`` comment lines are allowed in all three. Converters for
public benchmark releases live outside the library; it only ever parses
this plain-text layout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graph import SparseGraph, knn_graph, read_edge_list, write_edge_list

VALIDATION_SIZE = 500


class DatasetError(ValueError):
    """Raised for missing, inconsistent, or malformed dataset files."""


@dataclass
class Dataset:
    graph: SparseGraph
    features: np.ndarray
    labels: np.ndarray
    c: int
    name: str = ""

    @property
    def n(self):
        return self.graph.n


@dataclass
class SplitSpec:
    """Disjoint labeled / validation / test node sets covering the graph."""

    labeled: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    labels_per_class: int
    seed: int


def load_dataset(path, name=None):
    """Load and validate the three-file dataset under ``path``."""
    for fname in ("edges.txt", "features.csv", "labels.txt"):
        if not os.path.isfile(os.path.join(path, fname)):
            raise DatasetError(f"missing {fname} in {path}")
    features = np.loadtxt(os.path.join(path, "features.csv"),
                          delimiter=",", comments="#", ndmin=2,
                          dtype=np.float64)
    labels = np.loadtxt(os.path.join(path, "labels.txt"),
                        comments="#", ndmin=1, dtype=np.int64)
    n = features.shape[0]
    if labels.shape[0] != n:
        raise DatasetError(
            f"labels.txt has {labels.shape[0]} rows, features.csv has {n}")
    if labels.size and labels.min() < 0:
        raise DatasetError("labels must be non-negative class indices")
    graph = read_edge_list(os.path.join(path, "edges.txt"), n=n)
    return Dataset(graph=graph, features=features, labels=labels,
                   c=int(labels.max()) + 1 if labels.size else 0,
                   name=name or os.path.basename(os.path.normpath(path)))


def save_dataset(dataset, path):
    """Write the three-file layout; floats round-trip exactly."""
    os.makedirs(path, exist_ok=True)
    write_edge_list(dataset.graph, os.path.join(path, "edges.txt"))
    np.savetxt(os.path.join(path, "features.csv"), dataset.features,
               delimiter=",", fmt="%.17g")
    np.savetxt(os.path.join(path, "labels.txt"), dataset.labels, fmt="%d")


def sample_split(dataset, labels_per_class, seed):
    """Sample the low-label-rate evaluation split.

    Uniformly picks ``labels_per_class`` nodes per class without
    replacement, then 500 validation nodes from the remainder (20% of
    the remainder on tiny fixtures), leaving the rest as test.
    Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    labels = dataset.labels
    labeled = []
    deficient = []
    for cls in range(dataset.c):
        members = np.flatnonzero(labels == cls)
        if members.size < labels_per_class:
            deficient.append(cls)
            continue
        labeled.append(rng.choice(members, size=labels_per_class,
                                  replace=False))
    if deficient:
        raise DatasetError(
            f"classes with fewer than {labels_per_class} nodes: {deficient}")
    labeled = np.sort(np.concatenate(labeled))
    mask = np.ones(dataset.n, dtype=bool)
    mask[labeled] = False
    remainder = rng.permutation(np.flatnonzero(mask))
    if remainder.size >= VALIDATION_SIZE:
        num_val = VALIDATION_SIZE
    else:
        num_val = min(max(1, remainder.size // 5), max(0, remainder.size - 1))
    validation = np.sort(remainder[:num_val])
    test = np.sort(remainder[num_val:])
    return SplitSpec(labeled=labeled, validation=validation, test=test,
                     labels_per_class=labels_per_class, seed=seed)


def make_blobs(n_per_class, c, d, separation, seed, k=7):
    """Gaussian-cluster fixture with a kNN graph over the features.

    Cluster centers sit on a deterministic axis grid scaled by
    ``separation``; features add unit-variance noise.
    """
    if min(n_per_class, c, d) <= 0 or separation <= 0:
        raise ValueError("blob parameters must be positive")
    rng = np.random.default_rng(seed)
    centers = np.zeros((c, d))
    for j in range(c):
        centers[j, j % d] = separation * (1 + j // d)
    labels = np.repeat(np.arange(c), n_per_class)
    features = centers[labels] + rng.standard_normal((labels.size, d))
    graph = knn_graph(features, k=min(k, labels.size - 1))
    return Dataset(graph=graph, features=features, labels=labels, c=c,
                   name="blobs")
