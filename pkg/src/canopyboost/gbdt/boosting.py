"""Gradient boosting with oblivious (symmetric) trees.

Every level of an oblivious tree applies one ``(feature, threshold)`` test to
all nodes, so a leaf index is the bit code of ``d`` comparisons. Trees are
grown greedily level by level on histograms of pre-binned features, and leaf
values are Newton steps ``-G / (H + l2_reg)``.

Leaf bit order: the level-0 test is the most significant bit.
"""
from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _kernels
from .binning import QuantileBinner
from .losses import (
    LOSSES,
    WEIGHTED_MULTICLASS,
    WEIGHTED_RMSE,
    QuantizationMap,
    gradients,
    loss_weighted_multiclass,
    loss_weighted_rmse,
)

logger = logging.getLogger(__name__)

MAX_DEPTH = 16
CLASSIFICATION_L2 = 1e-3
HISTOGRAM_STORE_BYTES = 256 * 2**20


@dataclass(frozen=True)
class GbdtHyperparams:
    num_trees: int = 500
    depth: int = 6
    learning_rate: float = 0.1
    histogram_bins: int = 255
    min_samples_leaf: int = 20
    loss: str = WEIGHTED_RMSE
    early_stopping_rounds: int | None = 50
    l2_reg: float | None = None
    subsample: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_trees < 1:
            raise ValueError("num_trees must be at least 1")
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 2 <= self.histogram_bins <= 256:
            raise ValueError("histogram_bins must be in [2, 256]")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.early_stopping_rounds is not None and self.early_stopping_rounds < 1:
            raise ValueError("early_stopping_rounds must be positive or None")
        if not 0 < self.subsample <= 1:
            raise ValueError("subsample must be in (0, 1]")

    @property
    def leaf_l2(self) -> float:
        """Ridge term: exact weighted means for regression, 1e-3 for multiclass."""
        if self.l2_reg is not None:
            return self.l2_reg
        return 0.0 if self.loss == WEIGHTED_RMSE else CLASSIFICATION_L2


@dataclass(frozen=True, eq=False)
class TrainingSet:
    features: np.ndarray
    targets: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("features must be an (N, M) matrix")
        y = np.asarray(self.targets).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("features and targets disagree on N")
        w = np.ones(X.shape[0]) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (X.shape[0],):
            raise ValueError("weights must have one entry per sample")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y.astype(float))) and np.all(np.isfinite(w))):
            raise ValueError("training data must be finite")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.features.shape[0]


@dataclass(frozen=True, eq=False)
class ObliviousTree:
    features: np.ndarray
    thresholds: np.ndarray
    leaf_values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.features, dtype=np.int64)
        t = np.asarray(self.thresholds, dtype=np.float64)
        v = np.asarray(self.leaf_values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if f.shape != t.shape or v.shape[0] != 2 ** f.size:
            raise ValueError("oblivious tree needs 2**depth leaves")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "leaf_values", v)

    @property
    def depth(self) -> int:
        return self.features.size

    def leaf_index(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _kernels.leaf_indices(X, self.features, self.thresholds)

    def __call__(self, X) -> np.ndarray:
        return self.leaf_values[self.leaf_index(X)]


@dataclass(frozen=True, eq=False)
class GbdtModel:
    base_score: np.ndarray
    trees: list = field(default_factory=list)
    learning_rate: float = 0.1
    loss: str = WEIGHTED_RMSE
    n_features: int = 1
    quantization: QuantizationMap | None = None

    def __post_init__(self):
        object.__setattr__(self, "base_score", np.atleast_1d(np.asarray(self.base_score, dtype=np.float64)))
        for tree in self.trees:
            if tree.depth and tree.features.max() >= self.n_features:
                raise ValueError("tree references a feature beyond n_features")

    @property
    def n_outputs(self) -> int:
        return self.base_score.size

    @property
    def leaf_count(self) -> int:
        return sum(t.leaf_values.shape[0] for t in self.trees)

    def raw_predict(self, X, n_trees: int | None = None) -> np.ndarray:
        """``F0 + lr * sum(h_z)`` accumulated in tree order, shape ``(N, n_outputs)``."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected features of length {self.n_features}, got shape {X.shape}"
            )
        trees = self.trees[:n_trees]
        raw = np.tile(self.base_score, (X.shape[0], 1))
        if not trees:
            return raw
        offsets = np.cumsum([0] + [t.depth for t in trees])
        leaf_offsets = np.cumsum([0] + [t.leaf_values.shape[0] for t in trees])[:-1]
        features = np.concatenate([t.features for t in trees])
        thresholds = np.concatenate([t.thresholds for t in trees])
        leaves = np.ascontiguousarray(np.concatenate([t.leaf_values for t in trees]))
        _kernels.accumulate_ensemble(
            X, raw, offsets, features, thresholds, leaf_offsets, leaves, self.learning_rate
        )
        return raw


# ------------------------------------------------------------------ training


def _pack_stats(g, h):
    n = g.shape[0]
    return np.ascontiguousarray(np.hstack([g, h, np.ones((n, 1))]))


def find_best_oblivious_split(binned, n_bins, nodes, stats, n_nodes, active=None,
                              l2_reg=0.0, min_samples_leaf=1, store=None, level=0):
    """Best level-wide split over all features.

    Returns ``(feature, bin, gain)`` where samples with ``bin <= split bin``
    go left, or ``None`` when no split has positive gain. Ties go to the
    lowest feature index, then the lowest bin.

    When ``store`` (see :func:`histogram_store`) is given, histograms are
    carried between consecutive levels of one tree and only right children
    are accumulated.
    """
    if active is None:
        active = np.ones(n_nodes, dtype=np.bool_)
    n_bins = np.asarray(n_bins, dtype=np.int64)
    n_out = (stats.shape[1] - 1) // 2
    args = (nodes, stats, n_nodes, active, n_out, float(l2_reg), float(min_samples_leaf))
    if store is None:
        gains, bins = _kernels.best_splits_direct(binned, n_bins, *args)
    else:
        gains, bins = _kernels.best_splits_stored(binned, n_bins, store, level, *args)
    best = -1
    for f in range(gains.size):
        if bins[f] >= 0 and (best < 0 or gains[f] > gains[best] * (1.0 + _kernels.TIE_RTOL)):
            best = f
    if best < 0 or not gains[best] > 0:
        return None
    return best, int(bins[best]), float(gains[best])


def histogram_store(n_features, n_bins, depth, n_stats, max_bytes=HISTOGRAM_STORE_BYTES):
    """Preallocated per-feature histograms for the subtraction trick, or None if too large."""
    rows = 2 ** max(depth - 1, 0) * int(np.max(n_bins))
    if n_features * rows * n_stats * 8 > max_bytes:
        return None
    return np.zeros((n_features, rows, n_stats))


def grow_oblivious_tree(binned, n_bins, thresholds, stats, depth, l2_reg, min_samples_leaf, store=None):
    """Grow one tree; returns ``(ObliviousTree, leaf index per sample)``.

    A node whose children would fall below ``min_samples_leaf`` is frozen:
    all leaves below it share its Newton value.
    """
    n = stats.shape[0]
    n_out = (stats.shape[1] - 1) // 2
    nodes = np.zeros(n, dtype=np.int64)
    freeze = np.full(1, -1, dtype=np.int64)
    split_features, split_thresholds = [], []
    for level in range(depth):
        n_nodes = 2 ** level
        best = find_best_oblivious_split(
            binned, n_bins, nodes, stats, n_nodes, freeze < 0, l2_reg, min_samples_leaf,
            store=store, level=level,
        )
        if best is None:
            break
        f, b, _ = best
        _kernels.advance_nodes(nodes, binned[f], b)
        child = _kernels.node_totals(nodes, stats, 2 * n_nodes)[:, -1].reshape(n_nodes, 2)
        too_small = (child.min(axis=1) < min_samples_leaf) & (freeze < 0)
        freeze = np.repeat(np.where(too_small, level, freeze), 2)
        split_features.append(f)
        split_thresholds.append(thresholds[f][b])

    d = len(split_features)
    leaf_stats = _kernels.node_totals(nodes, stats, 2 ** d)
    values = np.zeros((2 ** d, n_out))
    for leaf in range(2 ** d):
        k = d if freeze[leaf] < 0 else int(freeze[leaf])
        group = leaf >> (d - k)
        s = leaf_stats[group << (d - k) : (group + 1) << (d - k)].sum(axis=0)
        if s[-1] <= 0:
            continue
        G, H = s[:n_out], s[n_out : 2 * n_out]
        denom = H + l2_reg
        values[leaf] = np.where(denom > 0, -G / np.where(denom > 0, denom, 1.0), 0.0)
    tree = ObliviousTree(np.array(split_features, dtype=np.int64), np.array(split_thresholds), values)
    return tree, nodes


def _validation_loss(loss, raw, data):
    if loss == WEIGHTED_RMSE:
        return loss_weighted_rmse(raw[:, 0], data.targets.astype(float), data.weights)
    return loss_weighted_multiclass(raw, data.targets.astype(np.int64), data.weights)


@contextmanager
def _thread_limit(n_threads):
    if n_threads is None:
        yield
        return
    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(n_threads), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def train(data: TrainingSet, validation: TrainingSet | None = None,
          hp: GbdtHyperparams | None = None, n_classes: int | None = None,
          quantization: QuantizationMap | None = None, n_threads: int | None = None,
          history: list | None = None) -> GbdtModel:
    """Fit a boosted ensemble of oblivious trees.

    For ``WeightedMultiClass`` the targets are class ids in ``[0, n_classes)``.
    If ``history`` is a list, the weighted training MSE (regression) or loss
    (classification) after every iteration is appended to it.
    """
    hp = hp or GbdtHyperparams()
    if len(data) < 2:
        raise ValueError("training needs at least two samples")
    if not data.weights.sum() > 0:
        raise ValueError("training weights must not all be zero")
    X = data.features
    w = data.weights
    classify = hp.loss == WEIGHTED_MULTICLASS
    if classify:
        labels = data.targets.astype(np.int64)
        if n_classes is None:
            n_classes = quantization.n_classes if quantization else int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= n_classes:
            raise ValueError("class labels outside [0, n_classes)")
        targets = labels
        base = np.zeros(n_classes)
    else:
        targets = data.targets.astype(np.float64)
        base = np.array([np.sum(w * targets) / np.sum(w)])

    with _thread_limit(n_threads):
        binner = QuantileBinner(hp.histogram_bins).fit(X)
        binned = binner.transform(X)
        n_bins = binner.n_bins_
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(hp.seed & (2**64 - 1))))

        raw = np.tile(base, (len(data), 1))
        val_raw = None
        if validation is not None:
            val_raw = np.tile(base, (len(validation), 1))
            best_loss = _validation_loss(hp.loss, val_raw, validation)
        best_iter, stale = 0, 0
        trees = []
        l2 = hp.leaf_l2
        n_stats = 2 * base.size + 1
        store = histogram_store(X.shape[1], n_bins, hp.depth, n_stats)
        for z in range(hp.num_trees):
            g, h = gradients(hp.loss, raw, targets, w)
            stats = _pack_stats(g, h)
            if hp.subsample < 1.0:
                keep = rng.random(len(data)) < hp.subsample
                stats[~keep] = 0.0
            tree, leaf_of = grow_oblivious_tree(
                binned, n_bins, binner.thresholds_, stats, hp.depth, l2, hp.min_samples_leaf, store
            )
            trees.append(tree)
            raw += hp.learning_rate * tree.leaf_values[leaf_of]
            if history is not None:
                if classify:
                    history.append(loss_weighted_multiclass(raw, targets, w))
                else:
                    history.append(float(np.sum(w * (raw[:, 0] - targets) ** 2) / np.sum(w)))
            if val_raw is not None:
                val_raw += hp.learning_rate * tree(validation.features)
                current = _validation_loss(hp.loss, val_raw, validation)
                if current < best_loss:
                    best_loss, best_iter, stale = current, z + 1, 0
                else:
                    stale += 1
                    if hp.early_stopping_rounds is not None and stale >= hp.early_stopping_rounds:
                        logger.info("early stop at tree %d, best iteration %d", z + 1, best_iter)
                        break
        if val_raw is not None and hp.early_stopping_rounds is not None:
            trees = trees[:best_iter]

    return GbdtModel(
        base_score=base,
        trees=trees,
        learning_rate=hp.learning_rate,
        loss=hp.loss,
        n_features=X.shape[1],
        quantization=quantization,
    )


def predict(model: GbdtModel, features, n_threads: int | None = None):
    """Heights for regression models; ``(heights, ClassProbabilities)`` for classifiers."""
    from .losses import ClassProbabilities

    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    X = X.reshape(1, -1) if single else X.reshape(-1, X.shape[-1])
    with _thread_limit(n_threads):
        raw = model.raw_predict(X)
    if model.loss == WEIGHTED_RMSE:
        out = raw[:, 0]
        return out[0] if single else out
    probs = ClassProbabilities.from_logits(raw)
    classes = probs.argmax()
    heights = model.quantization.heights(classes) if model.quantization else classes.astype(float)
    if single:
        return heights[0], ClassProbabilities(probs.logits[0], probs.probabilities[0])
    return heights, probs
