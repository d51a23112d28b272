"""Equal-frequency feature binning.

Thresholds are chosen from the sorted distinct values of each column using
sample ranks only, so any strictly increasing transform of a column yields the
same bin assignment. A value ``x`` falls in bin ``i`` iff
``thresholds[i - 1] < x <= thresholds[i]``.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

MAX_BINS = 256


def _midpoint(a, b):
    mid = a + 0.5 * (b - a)
    # adjacent floats: keep the boundary strictly below b
    if not a <= mid < b:
        mid = a
    return mid


def find_thresholds(col, max_bins):
    """Bin boundaries for one column, at most ``max_bins - 1`` of them."""
    col = np.asarray(col, dtype=np.float64)
    uniques, counts = np.unique(col, return_counts=True)
    if uniques.size <= 1:
        return np.empty(0)
    if uniques.size <= max_bins:
        cut_after = np.arange(uniques.size - 1)
    else:
        cum = np.cumsum(counts)
        targets = np.arange(1, max_bins) * (col.size / max_bins)
        cut_after = np.searchsorted(cum, targets, side="left")
        cut_after = np.unique(np.clip(cut_after, 0, uniques.size - 2))
    return np.array([_midpoint(uniques[i], uniques[i + 1]) for i in cut_after])


class QuantileBinner(TransformerMixin, BaseEstimator):
    """Map continuous features to small integer bins.

    ``transform`` returns a feature-major ``(n_features, n_samples)`` uint8
    array, the layout the histogram kernels iterate over.
    """

    def __init__(self, max_bins=255):
        self.max_bins = max_bins

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if not 2 <= self.max_bins <= MAX_BINS:
            raise ValueError(f"max_bins must be in [2, {MAX_BINS}], got {self.max_bins}")
        self.thresholds_ = [find_thresholds(X[:, j], self.max_bins) for j in range(X.shape[1])]
        self.n_bins_ = np.array([t.size + 1 for t in self.thresholds_], dtype=np.int64)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "thresholds_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.empty((X.shape[1], X.shape[0]), dtype=np.uint8)
        for j, thr in enumerate(self.thresholds_):
            out[j] = np.searchsorted(thr, X[:, j], side="left")
        return out
