"""Loss functions, their gradients, and height quantization for classification."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

WEIGHTED_RMSE = "WeightedRmse"
WEIGHTED_MULTICLASS = "WeightedMultiClass"
LOSSES = (WEIGHTED_RMSE, WEIGHTED_MULTICLASS)


def _check_weights(weights, n):
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if not total > 0:
        raise ValueError("weights must not all be zero")
    return w, total


def loss_weighted_rmse(pred, targets, weights=None) -> float:
    pred = np.asarray(pred, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if pred.shape != targets.shape:
        raise ValueError("pred and targets differ in shape")
    w, total = _check_weights(weights, pred.size)
    return math.sqrt(float(np.sum((pred - targets) ** 2 * w) / total))


def loss_weighted_multiclass(logits, labels, weights=None) -> float:
    """Weighted negative log-likelihood of the softmax of ``logits``."""
    logits = np.asarray(logits, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or logits.shape[0] != labels.shape[0]:
        raise ValueError("logits must be (N, T) with one label per row")
    w, total = _check_weights(weights, labels.size)
    log_p = logits[np.arange(labels.size), labels] - logsumexp(logits, axis=1)
    return float(-np.sum(w * log_p) / total)


def gradients(loss: str, raw, targets, weights=None):
    """Per-sample weighted gradient and hessian of the loss w.r.t. the raw score.

    Regression uses squared error (same minimizer as weighted RMSE), so the
    negative gradient is the residual ``t - F``. Shapes are ``(N, T)`` with
    T = 1 for regression.
    """
    raw = np.asarray(raw, dtype=float)
    n = raw.shape[0]
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if loss == WEIGHTED_RMSE:
        r = raw.reshape(n, -1)
        g = (r - np.asarray(targets, dtype=float).reshape(n, 1)) * w[:, None]
        h = np.broadcast_to(w[:, None], g.shape).copy()
        return g, h
    if loss == WEIGHTED_MULTICLASS:
        p = softmax(raw, axis=1)
        g = p.copy()
        g[np.arange(n), np.asarray(targets, dtype=np.int64)] -= 1.0
        g *= w[:, None]
        h = p * (1.0 - p) * w[:, None]
        return g, h
    raise ValueError(f"unknown loss {loss!r}")


@dataclass(frozen=True)
class ClassProbabilities:
    logits: np.ndarray
    probabilities: np.ndarray

    @classmethod
    def from_logits(cls, logits) -> "ClassProbabilities":
        logits = np.asarray(logits, dtype=float)
        return cls(logits, softmax(logits, axis=-1))

    def argmax(self) -> np.ndarray:
        return np.argmax(self.probabilities, axis=-1)


@dataclass(frozen=True)
class QuantizationMap:
    origin: float
    bin_width: float
    n_classes: int

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ValueError("bin_width must be positive")
        if self.n_classes < 2:
            raise ValueError(f"quantization needs at least 2 classes, got {self.n_classes}")

    def classes(self, heights) -> np.ndarray:
        h = np.asarray(heights, dtype=float)
        c = np.floor((h - self.origin) / self.bin_width).astype(np.int64)
        return np.clip(c, 0, self.n_classes - 1)

    def heights(self, classes) -> np.ndarray:
        return self.origin + (np.asarray(classes) + 0.5) * self.bin_width


def quantize_labels(heights, bin_width: float, height_range=None):
    """Quantize heights into ``bin_width`` classes.

    The class grid covers ``[min, max]`` of the data, or ``height_range`` when
    given. Values outside the grid are clamped to the edge classes.
    """
    if not bin_width > 0:
        raise ValueError("bin_width must be positive")
    h = np.asarray(heights, dtype=float).ravel()
    if h.size == 0:
        raise ValueError("cannot quantize an empty height list")
    if not np.all(np.isfinite(h)):
        raise ValueError("heights must be finite")
    lo, hi = (h.min(), h.max()) if height_range is None else height_range
    origin = math.floor(lo / bin_width) * bin_width
    n_classes = int(math.floor((hi - origin) / bin_width)) + 1
    qmap = QuantizationMap(origin, bin_width, n_classes)
    return qmap.classes(h), qmap


def class_weights(labels, n_classes: int) -> np.ndarray:
    """Inverse-frequency weights ``N / (T n_c)`` for each sample's class."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
        raise ValueError("labels outside [0, n_classes)")
    counts = np.bincount(labels, minlength=n_classes)
    return labels.size / (n_classes * counts[labels].astype(float))
