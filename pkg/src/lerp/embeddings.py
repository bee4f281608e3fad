"""Row-stochastic label distributions and the transforms acting on them.

A label matrix holds one probability distribution over classes per node.
Everything here is a pure function over ndarrays; validity is enforced via
:func:`assert_label_matrix` rather than silent renormalization so that
propagation bugs surface instead of being papered over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMPLEX_TOL = 1e-9


class SimplexError(ValueError):
    """A label matrix failed the row-sum-one / non-negativity invariants."""


@dataclass
class GroundTruth:
    """Known labels of a node subset: class indices and their one-hot rows."""

    labels: np.ndarray
    onehot: np.ndarray


def assert_label_matrix(f, tol=SIMPLEX_TOL, name="F"):
    """Raise :class:`SimplexError` unless every row of ``f`` is a
    probability distribution within ``tol``."""
    f = np.asarray(f)
    if f.ndim != 2:
        raise SimplexError(f"{name} must be 2-D")
    if not np.all(np.isfinite(f)):
        raise SimplexError(f"{name} contains non-finite entries")
    if f.min(initial=0.0) < -tol:
        raise SimplexError(f"{name} has negative entries (min {f.min()})")
    err = np.abs(f.sum(axis=1) - 1.0).max(initial=0.0)
    if err > tol:
        raise SimplexError(f"{name} row sums deviate from 1 by {err:.3e}")


def softmax_rows(logits):
    """Row-wise softmax, max-shifted so any finite input is safe."""
    logits = np.asarray(logits, dtype=np.float64)
    # The shift itself may round to -inf near the float ceiling; the
    # resulting exp(-inf) = 0 is exactly right, so mute the warning.
    with np.errstate(over="ignore"):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax_rows(logits):
    """Row-wise log-softmax in the stable log-sum-exp form."""
    logits = np.asarray(logits, dtype=np.float64)
    with np.errstate(over="ignore"):
        shifted = logits - logits.max(axis=-1, keepdims=True)
        return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def sharpen(dist, temperature):
    """Concentrate distributions toward their argmax.

    Raises each entry to the power 1/temperature and renormalizes per
    row. ``temperature == 1`` returns the input unchanged; temperatures
    below one sharpen, above one flatten. Exact zeros stay zero.
    """
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    dist = np.asarray(dist, dtype=np.float64)
    if dist.min(initial=0.0) < 0:
        raise ValueError("distributions must be non-negative")
    if temperature == 1.0:
        return dist.copy()
    powered = dist ** (1.0 / temperature)
    total = powered.sum(axis=-1, keepdims=True)
    if np.any(total == 0):
        raise ValueError("cannot sharpen an all-zero distribution")
    return powered / total


def one_hot(labels, num_classes):
    """Encode class indices as one-hot rows."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValueError(
            f"labels must lie in [0, {num_classes}), got "
            f"[{labels.min()}, {labels.max()}]")
    onehot = np.zeros((labels.shape[0], num_classes))
    onehot[np.arange(labels.shape[0]), labels] = 1.0
    return GroundTruth(labels=labels, onehot=onehot)


def argmax_labels(f):
    """Per-row argmax; ties go to the lowest class index."""
    return np.argmax(np.asarray(f), axis=1)
