"""Jit-compiled inner loops for histogram split search and tree evaluation.

Per-sample statistics are packed as rows of ``stats`` with layout
``[g_0 .. g_{T-1}, h_0 .. h_{T-1}, c]`` so the same kernels serve scalar
regression (T = 1) and vector-leaf multiclass trees; ``c`` is 1 for samples
that take part in the current tree and 0 otherwise.

Histograms are flat ``(n_nodes * stride, n_stats)`` arrays, row
``node * stride + bin``. At levels below the root only right children are
accumulated; left children are parent minus right.

Every histogram is accumulated in fixed sample order and features are
processed independently, so results do not depend on the thread count.
"""
import numpy as np
from numba import njit, prange

CACHE = True
# gains within this relative margin count as ties (rounding noise)
TIE_RTOL = 1e-10


@njit(cache=CACHE, nogil=True)
def _node_score(hist, row, n_out, l2_reg):
    if hist[row, 2 * n_out] < 0.5:
        return 0.0
    s = 0.0
    for k in range(n_out):
        denom = hist[row, n_out + k] + l2_reg
        if denom > 0.0:
            g = hist[row, k]
            s += g * g / denom
    return s


@njit(cache=CACHE, nogil=True)
def _accumulate(hist, col, idx, node_of, stats, stride):
    """hist[node_of[j] * stride + col[idx[j]]] += stats[j] for every j."""
    n_stats = stats.shape[1]
    if n_stats == 3:
        for j in range(idx.shape[0]):
            r = node_of[j] * stride + col[idx[j]]
            hist[r, 0] += stats[j, 0]
            hist[r, 1] += stats[j, 1]
            hist[r, 2] += stats[j, 2]
    else:
        for j in range(idx.shape[0]):
            r = node_of[j] * stride + col[idx[j]]
            for k in range(n_stats):
                hist[r, k] += stats[j, k]


@njit(cache=CACHE, nogil=True)
def _best_split_for_feature(hist, n_nodes, stride, n_bins, active, n_out, l2_reg, min_samples_leaf):
    """Best bin boundary for one feature; returns (gain, bin) with bin = -1 if none.

    Samples with bin <= b go left. ``active[node]`` is False for nodes that
    are frozen and no longer split.
    """
    n_stats = hist.shape[1]
    count_col = n_stats - 1
    totals = np.zeros((n_nodes, n_stats))
    parent_score = np.zeros(n_nodes)
    for node in range(n_nodes):
        base = node * stride
        for b in range(n_bins):
            for k in range(n_stats):
                totals[node, k] += hist[base + b, k]
    for node in range(n_nodes):
        parent_score[node] = _node_score(totals, node, n_out, l2_reg)

    left = np.zeros((n_nodes, n_stats))
    scratch = np.zeros((1, n_stats))
    best_gain = 0.0
    best_bin = -1
    for b in range(n_bins - 1):
        gain = 0.0
        for node in range(n_nodes):
            r = node * stride + b
            for k in range(n_stats):
                left[node, k] += hist[r, k]
            if not active[node]:
                continue
            n_left = left[node, count_col]
            n_right = totals[node, count_col] - n_left
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            for k in range(n_stats):
                scratch[0, k] = totals[node, k] - left[node, k]
            gain += (
                _node_score(left, node, n_out, l2_reg)
                + _node_score(scratch, 0, n_out, l2_reg)
                - parent_score[node]
            )
        if gain > best_gain + TIE_RTOL * best_gain:
            best_gain = gain
            best_bin = b
    return best_gain, best_bin


@njit(cache=CACHE, parallel=True)
def best_splits_direct(binned, n_bins, nodes, stats, n_nodes, active, n_out, l2_reg, min_samples_leaf):
    """Build every histogram from scratch (no storage kept)."""
    n_features = binned.shape[0]
    stride = 1
    for f in range(n_features):
        stride = max(stride, n_bins[f])
    gains = np.zeros(n_features)
    bins = np.full(n_features, -1, dtype=np.int64)
    idx = np.arange(nodes.shape[0])
    for f in prange(n_features):
        if n_bins[f] < 2:
            continue
        hist = np.zeros((n_nodes * stride, stats.shape[1]))
        _accumulate(hist, binned[f], idx, nodes, stats, stride)
        g, b = _best_split_for_feature(hist, n_nodes, stride, n_bins[f], active, n_out, l2_reg, min_samples_leaf)
        gains[f] = g
        bins[f] = b
    return gains, bins


@njit(cache=CACHE, parallel=True)
def best_splits_stored(binned, n_bins, store, level, nodes, stats, n_nodes, active, n_out, l2_reg, min_samples_leaf):
    """Split search that keeps per-feature histograms in ``store`` across levels.

    ``store`` has shape ``(n_features, max_nodes * stride, n_stats)`` and on
    entry holds the previous level's histograms (ignored at level 0).
    """
    n_features = binned.shape[0]
    stride = _max_bins(n_bins)
    gains = np.zeros(n_features)
    bins = np.full(n_features, -1, dtype=np.int64)
    if level == 0:
        idx = np.arange(nodes.shape[0])
        node_of = nodes
        sub_stats = stats
    else:
        idx = np.flatnonzero(nodes & 1)
        node_of = nodes[idx] >> 1
        sub_stats = stats[idx]
    n_stats = stats.shape[1]
    for f in prange(n_features):
        if n_bins[f] < 2:
            continue
        hist = store[f]
        if level == 0:
            hist[: n_nodes * stride] = 0.0
            _accumulate(hist, binned[f], idx, node_of, sub_stats, stride)
        else:
            right = np.zeros(((n_nodes // 2) * stride, n_stats))
            _accumulate(right, binned[f], idx, node_of, sub_stats, stride)
            for p in range(n_nodes // 2 - 1, -1, -1):
                for b in range(stride):
                    for k in range(n_stats):
                        r = right[p * stride + b, k]
                        hist[(2 * p) * stride + b, k] = hist[p * stride + b, k] - r
                        hist[(2 * p + 1) * stride + b, k] = r
        g, b = _best_split_for_feature(hist, n_nodes, stride, n_bins[f], active, n_out, l2_reg, min_samples_leaf)
        gains[f] = g
        bins[f] = b
    return gains, bins


@njit(cache=CACHE)
def _max_bins(n_bins):
    m = 1
    for f in range(n_bins.shape[0]):
        m = max(m, n_bins[f])
    return m


@njit(cache=CACHE, nogil=True)
def node_totals(nodes, stats, n_nodes):
    out = np.zeros((n_nodes, stats.shape[1]))
    for i in range(nodes.shape[0]):
        for k in range(stats.shape[1]):
            out[nodes[i], k] += stats[i, k]
    return out


@njit(cache=CACHE, nogil=True)
def advance_nodes(nodes, binned_col, split_bin):
    for i in range(nodes.shape[0]):
        nodes[i] = 2 * nodes[i] + (1 if binned_col[i] > split_bin else 0)


@njit(cache=CACHE, parallel=True)
def leaf_indices(X, features, thresholds):
    n = X.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        idx = 0
        for level in range(features.shape[0]):
            idx = 2 * idx + (1 if X[i, features[level]] > thresholds[level] else 0)
        out[i] = idx
    return out


@njit(cache=CACHE, parallel=True)
def accumulate_ensemble(X, raw, offsets, features, thresholds, leaf_offsets, leaves, learning_rate):
    """raw[i, :] += lr * leaf(tree, x_i) for every tree, in tree order.

    Trees are stored flat: levels of tree t are ``offsets[t]:offsets[t+1]``
    and its leaves start at row ``leaf_offsets[t]`` of ``leaves``.
    """
    n = X.shape[0]
    n_trees = offsets.shape[0] - 1
    n_out = raw.shape[1]
    for i in prange(n):
        for t in range(n_trees):
            idx = 0
            for level in range(offsets[t], offsets[t + 1]):
                idx = 2 * idx + (1 if X[i, features[level]] > thresholds[level] else 0)
            row = leaf_offsets[t] + idx
            for k in range(n_out):
                raw[i, k] += learning_rate * leaves[row, k]
