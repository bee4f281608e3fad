"""Alternate optimization of label embeddings and classifier weights.

One run proceeds in two stages. The initialization stage fits attribute
classifiers on hop-aggregated node features and predicts a first label
distribution for every node. Each subsequent round then (a) propagates
the embeddings toward that initialization, (b) extends the curriculum set
of reliable nodes by one hop around the labeled set, (c) refits the
embedding classifiers on ground-truth plus sharpened pseudo-labels from
the curriculum, and (d) replaces the embeddings with the classifier
predictions.

Two degenerate modes are supported: ``graphhop`` skips the propagation
steps (zero inner iterations) and ``lerp-v`` skips the classifier stages,
leaving pure anchored propagation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .classifier import (Classifier, TrainConfig, curriculum_rows, predict,
                         train)
from .embeddings import (GroundTruth, argmax_labels, assert_label_matrix,
                         one_hot, softmax_rows)
from .graph import hop_aggregate, hop_distances, normalize_random_walk
from .propagation import (PropagationParams, RegularizerWeights,
                          full_variational_iterate, lerp_inner_iterate)

VARIANTS = ("lerp", "graphhop", "lerp-v")

# Full-batch training below this labeled count; minibatches otherwise.
FULL_BATCH_LIMIT = 64
DEFAULT_MINIBATCH = 64


@dataclass
class SolverConfig:
    """Everything one run needs besides the data.

    ``hops`` is the aggregation depth M, ``max_iter`` the inner
    propagation steps per round, ``alpha``/``beta``/``temperature`` the
    loss weight, mixing weight, and sharpening temperature. Rounds stop
    early once the embeddings change less than ``early_exit_tol`` in max
    norm; set it to ``None`` to always run ``max_round`` rounds.
    """

    hops: int = 2
    max_round: int = 100
    max_iter: int = 10
    alpha: float = 1.0
    beta: float = 0.5
    temperature: float = 1.0
    variant: str = "lerp"
    seed: int = 0
    classifier_mode: str = "per-hop"
    averaging: str = "probability"
    early_exit_tol: float | None = 1e-6
    inner_tol: float = 1e-6
    clamp_labeled: bool = False
    exact_inner: bool = False
    weights: RegularizerWeights | None = None
    train: TrainConfig | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.exact_inner and self.clamp_labeled:
            raise ValueError("exact_inner and clamp_labeled are exclusive")
        if self.classifier_mode not in ("per-hop", "single"):
            raise ValueError("classifier_mode must be 'per-hop' or 'single'")
        if self.averaging not in ("probability", "logit"):
            raise ValueError("averaging must be 'probability' or 'logit'")
        if self.hops < 0:
            raise ValueError("hops must be non-negative")
        if self.max_round < 0:
            raise ValueError("max_round must be non-negative")
        if self.train is None:
            self.train = TrainConfig(alpha=self.alpha,
                                     temperature=self.temperature)

    @property
    def effective_max_iter(self):
        return 0 if self.variant == "graphhop" else self.max_iter


@dataclass
class CurriculumSet:
    """Unlabeled nodes within ``round`` hops of any labeled node."""

    members: np.ndarray
    round: int

    @property
    def size(self):
        return int(self.members.size)


@dataclass
class RoundRecord:
    round: int
    cost: float
    val_acc: float
    test_acc: float
    curriculum_size: int
    classifier_loss: list[list[float]] = field(default_factory=list)


@dataclass
class ClassifierEnsemble:
    """Independent heads over different aggregation depths.

    In ``per-hop`` mode, the head for hop m sees the raw signal next to
    its m-step average; ``single`` mode uses one head over the whole hop
    stack. Predictions are combined by averaging probabilities or,
    optionally, logits.
    """

    members: list[Classifier]
    member_hops: list[int]
    hops: int
    signal_width: int
    mode: str
    averaging: str

    @classmethod
    def build(cls, num_classes, signal_width, hops, mode, averaging):
        if mode == "single":
            member_hops = [hops]
            widths = [signal_width * (hops + 1) + 1]
        elif hops == 0:
            member_hops = [0]
            widths = [signal_width + 1]
        else:
            member_hops = list(range(1, hops + 1))
            widths = [2 * signal_width + 1] * hops
        members = [Classifier.zeros(num_classes, w) for w in widths]
        return cls(members=members, member_hops=member_hops, hops=hops,
                   signal_width=signal_width, mode=mode, averaging=averaging)

    def member_features(self, stack):
        """Per-member input rows sliced from a hop stack, bias appended."""
        w = self.signal_width
        feats = []
        for m in self.member_hops:
            if self.mode == "single":
                block = stack
            elif m == 0:
                block = stack[:, :w]
            else:
                block = np.hstack([stack[:, :w], stack[:, m * w:(m + 1) * w]])
            feats.append(_with_bias(block))
        return feats

    def predict_stack(self, stack):
        """Averaged prediction from an already-aggregated stack."""
        feats = self.member_features(stack)
        if self.averaging == "logit":
            logits = [x @ mem.weights.T for mem, x in zip(self.members, feats)]
            return softmax_rows(np.mean(logits, axis=0))
        probs = [predict(mem, x) for mem, x in zip(self.members, feats)]
        return np.mean(probs, axis=0)

    def predict(self, view, signal):
        """Averaged prediction for a raw (n, signal_width) signal."""
        return self.predict_stack(hop_aggregate(view, signal, self.hops))


def _with_bias(x):
    return np.hstack([x, np.ones((x.shape[0], 1))])


def _stage_batch_size(requested, num_labeled):
    if num_labeled < FULL_BATCH_LIMIT:
        return 0
    return requested if requested > 0 else DEFAULT_MINIBATCH


@dataclass
class SolverState:
    """Mutable state threaded through the alternate rounds."""

    view: object
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    split: object
    config: SolverConfig
    weights: RegularizerWeights
    truth: GroundTruth
    val_truth: GroundTruth | None
    f_init: np.ndarray
    f: np.ndarray
    init_ensemble: ClassifierEnsemble
    round_ensemble: ClassifierEnsemble | None
    label_distances: np.ndarray
    rng: np.random.Generator
    round_index: int = 0
    curriculum: CurriculumSet | None = None
    last_inner: np.ndarray | None = None
    trace: list[RoundRecord] = field(default_factory=list)


@dataclass
class SolverResult:
    labels: np.ndarray
    trace: list[RoundRecord]
    f: np.ndarray
    f_init: np.ndarray
    weights: RegularizerWeights
    rounds_run: int


def accuracy(predicted, labels, index):
    """Fraction of nodes in ``index`` whose argmax matches the label."""
    index = np.asarray(index, dtype=np.int64)
    if index.size == 0:
        return float("nan")
    return float(np.mean(predicted[index] == labels[index]))


def init_stage(view, features, split, config, labels, num_classes, rng):
    """Fit the attribute classifiers and predict initial embeddings.

    Returns the trained ensemble, the row-stochastic initial label
    matrix, and the per-member training histories.
    """
    labeled = np.asarray(split.labeled, dtype=np.int64)
    present = np.unique(labels[labeled])
    if present.size < num_classes:
        missing = sorted(set(range(num_classes)) - set(present.tolist()))
        raise ValueError(f"classes missing from the labeled set: {missing}")
    truth = one_hot(labels[labeled], num_classes)
    val = np.asarray(split.validation, dtype=np.int64)
    val_truth = one_hot(labels[val], num_classes) if val.size else None

    stack = hop_aggregate(view, features, config.hops)
    ensemble = ClassifierEnsemble.build(num_classes, features.shape[1],
                                        config.hops, config.classifier_mode,
                                        config.averaging)
    cfg = replace(config.train,
                  batch_size=_stage_batch_size(config.train.batch_size,
                                               labeled.size))
    results = []
    for member, feats in zip(ensemble.members, ensemble.member_features(stack)):
        results.append(train(
            member, feats[labeled], truth.onehot, cfg, rng,
            val_features=feats[val] if val_truth is not None else None,
            val_onehot=val_truth.onehot if val_truth is not None else None))
    f_init = ensemble.predict_stack(stack)
    assert_label_matrix(f_init, name="f_init")
    return ensemble, f_init, results


def grow_curriculum(graph, split, r, distances=None):
    """Reliable unlabeled nodes at round ``r``: all unlabeled nodes whose
    BFS hop distance to the labeled set is at most ``r``."""
    if r < 1:
        raise ValueError("curriculum rounds start at 1")
    if distances is None:
        distances = hop_distances(graph, split.labeled)
    mask = np.ones(graph.n, dtype=bool)
    mask[np.asarray(split.labeled, dtype=np.int64)] = False
    return CurriculumSet(members=np.flatnonzero(mask & (distances <= r)),
                         round=r)


def cost_eval(view, weights, f, f_init, ensemble=None):
    """Value of the regularized objective at ``f``.

    Smoothness plus the two weighted anchor penalties; the classifier
    penalty re-aggregates ``f`` through the ensemble and is skipped when
    its weights are all zero.
    """
    assert_label_matrix(f, name="f")
    total = view.smoothness(f)
    total += float((weights.u * ((f - f_init) ** 2).sum(axis=1)).sum())
    if ensemble is not None and np.any(weights.u_alpha > 0):
        pred = ensemble.predict(view, f)
        total += float((weights.u_alpha * ((f - pred) ** 2).sum(axis=1)).sum())
    return float(total)


def init_state(dataset, split, config):
    """Run the initialization stage and assemble the round-zero state."""
    view = normalize_random_walk(dataset.graph)
    rng = np.random.default_rng(config.seed)
    labels = np.asarray(dataset.labels, dtype=np.int64)
    ensemble, f_init, _ = init_stage(view, dataset.features, split, config,
                                     labels, dataset.c, rng)
    alpha_eff = 0.0 if config.variant == "lerp-v" else config.alpha
    weights = config.weights
    if weights is None:
        weights = RegularizerWeights.from_scalars(dataset.graph.n, alpha_eff,
                                                  config.beta)
    round_ensemble = None
    if config.variant != "lerp-v":
        round_ensemble = ClassifierEnsemble.build(
            dataset.c, dataset.c, config.hops, config.classifier_mode,
            config.averaging)
    val = np.asarray(split.validation, dtype=np.int64)
    return SolverState(
        view=view,
        features=dataset.features,
        labels=labels,
        num_classes=dataset.c,
        split=split,
        config=config,
        weights=weights,
        truth=one_hot(labels[split.labeled], dataset.c),
        val_truth=one_hot(labels[val], dataset.c) if val.size else None,
        f_init=f_init,
        f=f_init.copy(),
        init_ensemble=ensemble,
        round_ensemble=round_ensemble,
        label_distances=hop_distances(dataset.graph, split.labeled),
        rng=rng,
    )


def alternate_round(state):
    """Advance the state by one optimization round.

    Order within the round: inner propagation, curriculum growth,
    classifier refit on labeled plus curriculum rows, embedding update
    from the refit classifiers. The degenerate modes skip the
    propagation (``graphhop``) or the classifier steps (``lerp-v``).
    """
    config = state.config
    r = state.round_index + 1
    if config.exact_inner:
        # Literal per-node-weight recursion: the anchor blends the
        # initialization with the incoming classifier prediction
        # (which is exactly the embedding this round starts from).
        f_hat = full_variational_iterate(
            state.view, state.weights, state.f_init, state.f,
            config.effective_max_iter, f_start=state.f,
            tol=config.inner_tol)
    else:
        params = PropagationParams(beta=config.beta,
                                   max_iter=config.effective_max_iter,
                                   tol=config.inner_tol)
        clamp_index = clamp_onehot = None
        if config.clamp_labeled:
            clamp_index = np.asarray(state.split.labeled, dtype=np.int64)
            clamp_onehot = state.truth.onehot
        f_hat = lerp_inner_iterate(state.view, state.f, state.f_init, params,
                                   clamp_index=clamp_index,
                                   clamp_onehot=clamp_onehot)
    state.last_inner = f_hat
    state.curriculum = grow_curriculum(state.view.graph, state.split, r,
                                       distances=state.label_distances)

    histories = []
    if config.variant == "lerp-v":
        f_new = f_hat
    else:
        labeled = np.asarray(state.split.labeled, dtype=np.int64)
        val = np.asarray(state.split.validation, dtype=np.int64)
        stack = hop_aggregate(state.view, f_hat, config.hops)
        ensemble = state.round_ensemble
        cfg = replace(config.train,
                      batch_size=_stage_batch_size(config.train.batch_size,
                                                   labeled.size))
        for member, feats in zip(ensemble.members,
                                 ensemble.member_features(stack)):
            rows, targets, weight = curriculum_rows(
                feats, state.truth, labeled, f_hat, state.curriculum.members,
                cfg.alpha, cfg.temperature)
            result = train(
                member, rows, targets, cfg, state.rng, sample_weight=weight,
                val_features=feats[val] if state.val_truth is not None else None,
                val_onehot=(state.val_truth.onehot
                            if state.val_truth is not None else None))
            histories.append(result.train_loss)
        f_new = ensemble.predict(state.view, f_hat)

    assert_label_matrix(f_new, name="f")
    cost = cost_eval(state.view, state.weights, f_new, state.f_init,
                     state.round_ensemble)
    predicted = argmax_labels(f_new)
    state.trace.append(RoundRecord(
        round=r,
        cost=cost,
        val_acc=accuracy(predicted, state.labels, state.split.validation),
        test_acc=accuracy(predicted, state.labels, state.split.test),
        curriculum_size=state.curriculum.size,
        classifier_loss=histories,
    ))
    state.f = f_new
    state.round_index = r
    return state


def run(config, dataset, split):
    """Full pipeline: initialization, alternate rounds, argmax labels."""
    state = init_state(dataset, split, config)
    for _ in range(config.max_round):
        f_prev = state.f
        alternate_round(state)
        if config.early_exit_tol is not None:
            if np.abs(state.f - f_prev).max(initial=0.0) < config.early_exit_tol:
                break
    return SolverResult(
        labels=argmax_labels(state.f),
        trace=state.trace,
        f=state.f,
        f_init=state.f_init,
        weights=state.weights,
        rounds_run=state.round_index,
    )


def trace_to_csv(trace, path):
    """Serialize per-round diagnostics as CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("round,cost,val_acc,test_acc,curriculum_size\n")
        for rec in trace:
            fh.write(f"{rec.round},{rec.cost!r},{rec.val_acc!r},"
                     f"{rec.test_acc!r},{rec.curriculum_size}\n")
