"""Label diffusion over the normalized graph.

Three families live here: the classical anchored label-propagation
baseline, the per-round inner iteration that pulls embeddings toward the
initialization while averaging over neighbors, and dense closed-form
solvers that exist purely as correctness oracles for the iterative paths.

All iterations preserve row-stochasticity. Rows of isolated nodes have no
neighbor mass to average, so the simplex-preserving updates assign them
their anchor row outright; the dense oracles adopt the same convention so
the two routes agree on every graph.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import assert_label_matrix

# Dense solves are test oracles; refuse graphs where an n x n inverse
# would be genuinely expensive.
DENSE_SOLVE_LIMIT = 2000


@dataclass
class PropagationParams:
    """Mixing weights and stopping controls for the iterative updates.

    ``alpha_lp`` is the neighbor share of the classical baseline;
    ``beta`` the neighbor share of the anchored inner iteration. Both
    loops stop after ``max_iter`` steps or once the max-norm change of
    one step falls below ``tol``.
    """

    alpha_lp: float = 0.99
    beta: float = 0.5
    max_iter: int = 10
    tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.alpha_lp < 1.0:
            raise ValueError("alpha_lp must lie in [0, 1)")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")


@dataclass
class RegularizerWeights:
    """Per-node diagonal weights of the two anchor penalties.

    ``u`` (positive) weights the pull toward the initial embeddings and
    ``u_alpha`` (non-negative) the pull toward the classifier
    predictions; an all-zero ``u_alpha`` removes the classifier term
    entirely.
    """

    u: np.ndarray
    u_alpha: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.u_alpha = np.asarray(self.u_alpha, dtype=np.float64)
        if self.u.shape != self.u_alpha.shape or self.u.ndim != 1:
            raise ValueError("u and u_alpha must be 1-D with equal length")
        if np.any(self.u <= 0):
            raise ValueError("u must be positive elementwise")
        if np.any(self.u_alpha < 0):
            raise ValueError("u_alpha must be non-negative")

    @classmethod
    def from_scalars(cls, n, alpha, beta):
        """Expand the scalar hyperparameters to per-node weights.

        The combined weight is fixed by ``beta`` (neighbor share
        ``beta`` corresponds to a total anchor weight of ``1/beta - 1``)
        and split between the two anchors in proportion to the
        classifier weight: ``u_alpha`` takes the fraction
        ``alpha / (1 + alpha)``, the initialization anchor the rest.
        """
        if not 0.0 < beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if alpha < 0:
            raise ValueError("alpha must be non-negative")
        total = 1.0 / beta - 1.0
        share = alpha / (1.0 + alpha)
        return cls(u=np.full(n, (1.0 - share) * total),
                   u_alpha=np.full(n, share * total))

    @property
    def combined(self):
        """Total anchor weight per node."""
        return self.u + self.u_alpha

    @property
    def neighbor_share(self):
        """Per-node neighbor mixing weight of the equivalent iteration."""
        return 1.0 / (1.0 + self.combined)

    def anchor(self, f_init, classifier_pred):
        """Weighted blend of the two anchors; rows stay on the simplex."""
        if classifier_pred is None:
            return f_init
        blended = (self.u[:, None] * f_init
                   + self.u_alpha[:, None] * classifier_pred)
        return blended / self.combined[:, None]

    def trace_u_alpha(self):
        return float(self.u_alpha.sum())


def lp_iterate(view, y, params):
    """Classical label propagation toward the anchor matrix ``y``.

    Starts from ``y`` and repeats ``alpha_lp`` times the neighbor
    average plus ``1 - alpha_lp`` times ``y``; rows of unlabeled nodes
    are expected to be zero in ``y``.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] != view.n:
        raise ValueError("anchor matrix must have one row per node")
    alpha = params.alpha_lp
    f = y.copy()
    for _ in range(params.max_iter):
        f_next = alpha * view.propagate(f) + (1.0 - alpha) * y
        delta = np.abs(f_next - f).max(initial=0.0)
        f = f_next
        if delta < params.tol:
            break
    return f


def lp_closed_form(view, y, alpha):
    """Fixed point of :func:`lp_iterate` by dense solve (oracle path)."""
    if view.n > DENSE_SOLVE_LIMIT:
        raise ValueError(
            f"dense solve limited to n <= {DENSE_SOLVE_LIMIT} nodes")
    y = np.asarray(y, dtype=np.float64)
    system = np.eye(view.n) - alpha * view.to_dense()
    return (1.0 - alpha) * np.linalg.solve(system, y)


def lerp_inner_iterate(view, f_start, f_init, params, validate=True,
                       clamp_index=None, clamp_onehot=None):
    """Anchored propagation of label embeddings.

    Runs exactly ``params.max_iter`` steps of ``beta`` times the
    neighbor average plus ``1 - beta`` times ``f_init``, starting from
    ``f_start`` (zero steps return it unchanged), with an optional early
    exit once a step changes nothing beyond ``params.tol``. With
    ``clamp_index`` given, rows of those nodes are reset to
    ``clamp_onehot`` after every step.

    Every iterate is row-stochastic; ``validate`` checks this.
    """
    f_start = np.asarray(f_start, dtype=np.float64)
    f_init = np.asarray(f_init, dtype=np.float64)
    if validate:
        assert_label_matrix(f_start, name="f_start")
        assert_label_matrix(f_init, name="f_init")
    beta = params.beta
    f = f_start.copy()
    for _ in range(params.max_iter):
        f_next = beta * view.propagate(f) + (1.0 - beta) * f_init
        if view.isolated.size:
            f_next[view.isolated] = f_init[view.isolated]
        if clamp_index is not None:
            f_next[clamp_index] = clamp_onehot
        if validate:
            assert_label_matrix(f_next, name="f")
        delta = np.abs(f_next - f).max(initial=0.0)
        f = f_next
        if delta < params.tol:
            break
    return f


def general_closed_form(view, weights, f_init, classifier_pred):
    """Minimizer of the doubly anchored smoothness objective by dense
    solve (oracle path).

    Solves ``(diag(u + u_alpha) + I - P) F = diag(u) F_init +
    diag(u_alpha) C`` where ``P`` is the neighbor-averaging matrix and
    ``C`` the classifier prediction; rows of isolated nodes are assigned
    their anchor row, matching the iterative route.
    """
    if view.n > DENSE_SOLVE_LIMIT:
        raise ValueError(
            f"dense solve limited to n <= {DENSE_SOLVE_LIMIT} nodes")
    f_init = np.asarray(f_init, dtype=np.float64)
    system = np.diag(weights.combined) + np.eye(view.n) - view.to_dense()
    rhs = weights.u[:, None] * f_init
    if classifier_pred is not None:
        rhs = rhs + weights.u_alpha[:, None] * np.asarray(classifier_pred,
                                                          dtype=np.float64)
    f = np.linalg.solve(system, rhs)
    if view.isolated.size:
        f[view.isolated] = weights.anchor(f_init, classifier_pred)[view.isolated]
    return f


def full_variational_iterate(view, weights, f_init, classifier_pred, iters,
                             f_start=None, tol=0.0, validate=True):
    """Propagation with per-node mixing weights toward the blended anchor.

    The general form of :func:`lerp_inner_iterate`: each node mixes its
    neighbor average (share ``1 / (1 + u + u_alpha)``) with the weighted
    blend of the two anchor matrices. Converges to
    :func:`general_closed_form`. Starts from ``f_init`` unless
    ``f_start`` is given.
    """
    f_init = np.asarray(f_init, dtype=np.float64)
    anchor = weights.anchor(f_init, classifier_pred)
    share = weights.neighbor_share[:, None]
    f = np.asarray(f_start if f_start is not None else f_init,
                   dtype=np.float64).copy()
    if validate:
        assert_label_matrix(f, name="f_start")
        assert_label_matrix(anchor, name="anchor")
    for _ in range(iters):
        f_next = share * view.propagate(f) + (1.0 - share) * anchor
        if view.isolated.size:
            f_next[view.isolated] = anchor[view.isolated]
        if validate:
            assert_label_matrix(f_next, name="f")
        delta = np.abs(f_next - f).max(initial=0.0)
        f = f_next
        if tol > 0.0 and delta < tol:
            break
    return f
