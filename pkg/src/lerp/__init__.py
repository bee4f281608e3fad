"""Transductive node classification on sparse graphs at low label rates.

The solver alternates between anchored label propagation and logistic
classifier refits over a growing curriculum of reliable nodes; the
``graphhop`` and ``lerp-v`` modes degenerate to classifier-only and
propagation-only updates respectively. See :mod:`lerp.solver` for the
driver and :mod:`lerp.cli` for the experiment harness.
"""

from ._kernels import backend_name
from .classifier import Classifier, TrainConfig
from .data import Dataset, SplitSpec, load_dataset, make_blobs, sample_split
from .embeddings import argmax_labels, one_hot, sharpen, softmax_rows
from .graph import (SparseGraph, hop_aggregate, hop_distances, knn_graph,
                    normalize_random_walk)
from .propagation import (PropagationParams, RegularizerWeights,
                          lerp_inner_iterate, lp_closed_form, lp_iterate)
from .solver import SolverConfig, run

__version__ = "0.1.0"

__all__ = [
    "Classifier", "TrainConfig", "Dataset", "SplitSpec", "load_dataset",
    "make_blobs", "sample_split", "argmax_labels", "one_hot", "sharpen",
    "softmax_rows", "SparseGraph", "hop_aggregate", "hop_distances",
    "knn_graph", "normalize_random_walk", "PropagationParams",
    "RegularizerWeights", "lerp_inner_iterate", "lp_closed_form",
    "lp_iterate", "SolverConfig", "run", "backend_name", "__version__",
]
