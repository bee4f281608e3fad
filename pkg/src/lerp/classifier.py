"""Multinomial logistic-regression heads trained with Adam.

The same machinery serves two roles: the attribute classifiers fitted on
hop-aggregated node features, and the per-round classifiers fitted on
hop-aggregated label embeddings with ground-truth and pseudo-label terms.
All losses are cross-entropies against simplex targets, so gradients have
the usual softmax-minus-target form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embeddings import log_softmax_rows, sharpen, softmax_rows

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    """Optimization settings shared by both classifier stages.

    ``batch_size == 0`` means full-batch training. ``alpha`` weights the
    pseudo-label loss term and ``temperature`` controls how much those
    pseudo-labels are sharpened before use as targets.
    """

    learning_rate: float = 0.01
    weight_decay: float = 5e-5
    max_epochs: int = 1000
    batch_size: int = 0
    patience: int = 10
    alpha: float = 1.0
    temperature: float = 1.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.batch_size < 0:
            raise ValueError("batch_size must be non-negative")


@dataclass
class Classifier:
    """Weight matrix plus Adam moment state."""

    weights: np.ndarray
    m: np.ndarray = field(repr=False, default=None)
    v: np.ndarray = field(repr=False, default=None)
    step: int = 0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.m is None:
            self.m = np.zeros_like(self.weights)
        if self.v is None:
            self.v = np.zeros_like(self.weights)

    @classmethod
    def zeros(cls, num_classes, num_features):
        return cls(weights=np.zeros((num_classes, num_features)))

    @property
    def num_features(self):
        return self.weights.shape[1]


def _weighted_ce(weights, features, targets, sample_weight):
    """Weighted sum of per-row cross-entropies against simplex targets."""
    logp = log_softmax_rows(features @ weights.T)
    return float(-(sample_weight[:, None] * targets * logp).sum())


def _weighted_ce_grad(weights, features, targets, sample_weight):
    probs = softmax_rows(features @ weights.T)
    return (sample_weight[:, None] * (probs - targets)).T @ features


def ce_loss_labeled(weights, features, onehot):
    """Mean cross-entropy of the labeled rows against their one-hot labels."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[0] == 0:
        raise ValueError("labeled set must be non-empty")
    w = np.full(features.shape[0], 1.0 / features.shape[0])
    return _weighted_ce(weights, features, onehot, w)


def grad_labeled(weights, features, onehot, weight_decay=0.0):
    """Gradient of :func:`ce_loss_labeled` plus coupled L2 decay."""
    if features.shape[0] == 0:
        raise ValueError("labeled set must be non-empty")
    w = np.full(features.shape[0], 1.0 / features.shape[0])
    return _weighted_ce_grad(weights, features, onehot, w) + weight_decay * weights


def ce_loss_curriculum(weights, stack, truth, labeled, f, curriculum, cfg):
    """Self-training loss: unnormalized labeled sum plus ``alpha`` times
    the sharpened pseudo-label sum over the reliable node set.

    Parameters
    ----------
    stack : (n, p) array
        Classifier input rows for every node.
    truth : GroundTruth
        One-hot labels aligned with ``labeled``.
    labeled, curriculum : index arrays
        Rows contributing the supervised and pseudo-label terms; an empty
        curriculum degrades to the supervised term alone.
    f : (n, c) array
        Current label embeddings supplying the pseudo-labels.
    """
    rows, targets, w = curriculum_rows(stack, truth, labeled, f, curriculum,
                                        cfg.alpha, cfg.temperature)
    return _weighted_ce(weights, rows, targets, w)


def grad_curriculum(weights, stack, truth, labeled, f, curriculum, cfg,
                    weight_decay=0.0):
    """Gradient of :func:`ce_loss_curriculum` plus coupled L2 decay."""
    rows, targets, w = curriculum_rows(stack, truth, labeled, f, curriculum,
                                        cfg.alpha, cfg.temperature)
    return _weighted_ce_grad(weights, rows, targets, w) + weight_decay * weights


def curriculum_rows(stack, truth, labeled, f, curriculum, alpha, temperature):
    """Stack labeled and reliable-node rows with their targets and weights.

    Pseudo-label targets are sharpened snapshots of the current
    embeddings: constants of the optimization, never differentiated."""
    labeled = np.asarray(labeled, dtype=np.int64)
    curriculum = np.asarray(curriculum, dtype=np.int64)
    if curriculum.size and alpha != 0.0:
        rows = np.vstack([stack[labeled], stack[curriculum]])
        targets = np.vstack([truth.onehot, sharpen(f[curriculum], temperature)])
        w = np.concatenate([np.ones(labeled.size),
                            np.full(curriculum.size, alpha)])
    else:
        rows = stack[labeled]
        targets = truth.onehot
        w = np.ones(labeled.size)
    return rows, targets, w


def adam_step(cls, grad, cfg):
    """One bias-corrected Adam update; mutates and returns ``cls``."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != cls.weights.shape:
        raise ValueError("gradient shape does not match the weights")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    cls.step += 1
    cls.m = ADAM_BETA1 * cls.m + (1.0 - ADAM_BETA1) * grad
    cls.v = ADAM_BETA2 * cls.v + (1.0 - ADAM_BETA2) * grad ** 2
    m_hat = cls.m / (1.0 - ADAM_BETA1 ** cls.step)
    v_hat = cls.v / (1.0 - ADAM_BETA2 ** cls.step)
    cls.weights = cls.weights - cfg.learning_rate * m_hat / (np.sqrt(v_hat)
                                                             + ADAM_EPS)
    return cls


@dataclass
class TrainResult:
    classifier: Classifier
    train_loss: list[float]
    val_loss: list[float]
    best_epoch: int


def train(cls, features, targets, cfg, rng, sample_weight=None,
          val_features=None, val_onehot=None):
    """Minibatch Adam with early stopping on validation loss.

    Runs up to ``cfg.max_epochs`` epochs, stopping once the validation
    loss has not improved for ``cfg.patience`` consecutive epochs, and
    restores the best-validation weights. Without a validation set the
    training loss doubles as the stopping signal. A single batch
    (``batch_size`` of 0 or >= the row count) keeps rows in their given
    order so full-batch runs are exactly reproducible.
    """
    features = np.ascontiguousarray(features, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    rows = features.shape[0]
    if rows == 0:
        raise ValueError("training set must be non-empty")
    if sample_weight is None:
        sample_weight = np.full(rows, 1.0 / rows)
    else:
        sample_weight = np.asarray(sample_weight, dtype=np.float64)
    has_val = val_features is not None
    if has_val:
        val_features = np.asarray(val_features, dtype=np.float64)
        val_weight = np.full(val_features.shape[0],
                             1.0 / max(1, val_features.shape[0]))

    batch = cfg.batch_size if 0 < cfg.batch_size < rows else rows
    train_hist, val_hist = [], []
    best_val = np.inf
    best_weights = cls.weights.copy()
    best_epoch = 0
    bad_epochs = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(rows) if batch < rows else np.arange(rows)
        for lo in range(0, rows, batch):
            sel = order[lo:lo + batch]
            scale = rows / sel.shape[0]
            grad = scale * _weighted_ce_grad(cls.weights, features[sel],
                                             targets[sel], sample_weight[sel])
            grad += cfg.weight_decay * cls.weights
            adam_step(cls, grad, cfg)
        train_loss = _weighted_ce(cls.weights, features, targets, sample_weight)
        train_hist.append(train_loss)
        if has_val:
            val_loss = _weighted_ce(cls.weights, val_features, val_onehot,
                                    val_weight)
        else:
            val_loss = train_loss
        val_hist.append(val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_weights = cls.weights.copy()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                break
    cls.weights = best_weights
    return TrainResult(classifier=cls, train_loss=train_hist,
                       val_loss=val_hist, best_epoch=best_epoch)


def predict(cls, features):
    """Row-stochastic class probabilities for the given feature rows."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape[1] != cls.num_features:
        raise ValueError(
            f"feature width {features.shape[1]} does not match the "
            f"classifier's {cls.num_features}")
    return softmax_rows(features @ cls.weights.T)


def save_checkpoint(cls, path):
    """Dump the weight matrix as text: a shape header then row-major values."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{cls.weights.shape[0]} {cls.weights.shape[1]}\n")
        for value in cls.weights.ravel():
            fh.write(f"{float(value)!r}\n")


def load_checkpoint(path):
    """Load a checkpoint written by :func:`save_checkpoint`."""
    with open(path, encoding="utf-8") as fh:
        shape = tuple(int(tok) for tok in fh.readline().split())
        values = np.array([float(line) for line in fh])
    return Classifier(weights=values.reshape(shape))
