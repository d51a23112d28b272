"""Boxcar covariance estimation and per-pixel feature extraction.

For a stack with ``Nb`` baselines every pixel carries a channel vector ``u`` of
length ``3 Nb``. Its sample covariance over a ``W x W`` window is summarized by
the real diagonal followed by the real and imaginary parts of the first row
(excluding the ``(0, 0)`` entry)::

    [R00, R11, ..., R(K-1)(K-1), Re R01, Im R01, ..., Re R0(K-1), Im R0(K-1)]

with ``K = 3 Nb`` and length ``M = K + 2 (K - 1)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .sardata import FormatError, HeightRaster, SlcStack

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-9


def feature_dimension(n_baselines: int) -> int:
    k = 3 * n_baselines
    return k + 2 * (k - 1)


def _check_window(window: int) -> int:
    if int(window) != window or window < 1 or window % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window}")
    return int(window)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Hermitian ``3Nb x 3Nb`` covariance; ``window`` is 1 for model-derived matrices."""

    entries: np.ndarray
    window: int = 1

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("covariance must be a square matrix")
        if entries.shape[0] % 3:
            raise ValueError("covariance order must be a multiple of 3")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def n_baselines(self) -> int:
        return self.order // 3

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(h)[0])

    def is_valid(self) -> bool:
        tr = max(self.trace(), np.finfo(float).tiny)
        diag = np.diag(self.entries)
        return (
            self.hermitian_error() <= HERMITIAN_RTOL * tr
            and np.all(diag.real >= 0)
            and self.min_eigenvalue() >= -PSD_RTOL * tr
        )


def estimate_covariance(stack: SlcStack, center: tuple[int, int], window: int) -> CovarianceMatrix:
    """Sample covariance of the channel vectors in the ``window x window`` box around ``center``."""
    window = _check_window(window)
    r, c = center
    half = window // 2
    if r - half < 0 or c - half < 0 or r + half >= stack.rows or c + half >= stack.cols:
        raise ValueError(f"window {window} at {center} exceeds the {stack.rows}x{stack.cols} stack")
    patch = stack.samples[:, r - half : r + half + 1, c - half : c + half + 1]
    u = patch.reshape(stack.geometry.n_channels, -1).astype(np.complex128)
    R = (u @ u.conj().T) / (window * window)
    # exact Hermitian symmetry regardless of BLAS rounding
    R = 0.5 * (R + R.conj().T)
    return CovarianceMatrix(R, window=window)


def extract_features(R: CovarianceMatrix | np.ndarray) -> np.ndarray:
    entries = R.entries if isinstance(R, CovarianceMatrix) else np.asarray(R)
    k = entries.shape[0]
    first_row = entries[0, 1:]
    out = np.empty(feature_dimension(k // 3))
    out[:k] = np.real(np.diag(entries))
    out[k::2] = first_row.real
    out[k + 1 :: 2] = first_row.imag
    return out


def features_to_covariance_parts(x: np.ndarray, n_baselines: int) -> tuple[np.ndarray, np.ndarray]:
    """Recover ``(diagonal, first_row)`` of R from a feature vector; ``first_row[0]`` is R00."""
    k = 3 * n_baselines
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != feature_dimension(n_baselines):
        raise ValueError("feature length does not match baseline count")
    diag = x[..., :k]
    row = np.empty(x.shape[:-1] + (k,), dtype=np.complex128)
    row[..., 0] = diag[..., 0]
    row[..., 1:] = x[..., k::2] + 1j * x[..., k + 1 :: 2]
    return diag, row


def _box_mean(image: np.ndarray, window: int) -> np.ndarray:
    """Mean over every fully contained ``window x window`` box (valid region only)."""
    s = np.zeros((image.shape[0] + 1, image.shape[1] + 1), dtype=image.dtype)
    np.cumsum(image, axis=0, out=s[1:, 1:])
    np.cumsum(s[1:, 1:], axis=1, out=s[1:, 1:])
    w = window
    total = s[w:, w:] - s[:-w, w:] - s[w:, :-w] + s[:-w, :-w]
    return total / (w * w)


@dataclass(frozen=True, eq=False)
class FeatureGrid:
    """Feature vectors on the valid (cropped) region, shape ``(rows, cols, M)``."""

    values: np.ndarray
    valid_offset: int
    window: int

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.dtype not in (np.float32, np.float64):
            values = values.astype(np.float64)
        if values.ndim != 3:
            raise ValueError("feature grid must be (rows, cols, M)")
        if self.valid_offset < 0:
            raise ValueError("valid_offset must be non-negative")
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def n_features(self) -> int:
        return self.values.shape[2]

    def as_matrix(self) -> np.ndarray:
        return self.values.reshape(-1, self.n_features)


def build_feature_grid(stack: SlcStack, window: int) -> FeatureGrid:
    window = _check_window(window)
    if stack.rows < window or stack.cols < window:
        raise ValueError(
            f"window {window} does not fit in the {stack.rows}x{stack.cols} stack"
        )
    k = stack.geometry.n_channels
    rows, cols = stack.rows - window + 1, stack.cols - window + 1
    out = np.empty((rows, cols, feature_dimension(k // 3)))
    ref = stack.samples[0].astype(np.complex128)
    for ch in range(k):
        u = stack.samples[ch].astype(np.complex128)
        out[..., ch] = _box_mean(np.abs(u) ** 2, window)
        if ch:
            cross = _box_mean(ref * u.conj(), window)
            out[..., k + 2 * (ch - 1)] = cross.real
            out[..., k + 2 * (ch - 1) + 1] = cross.imag
    return FeatureGrid(out, valid_offset=window // 2, window=window)


def average_raster(raster: HeightRaster, window: int) -> HeightRaster:
    window = _check_window(window)
    if raster.rows < window or raster.cols < window:
        raise ValueError(
            f"window {window} does not fit in the {raster.rows}x{raster.cols} raster"
        )
    mean = _box_mean(raster.values.astype(np.float64), window)
    return HeightRaster(mean, kind=raster.kind, valid_offset=raster.valid_offset + window // 2)


class CovarianceFeatures(BaseEstimator, TransformerMixin):
    """Stack-to-feature-matrix transformer for use in pipelines.

    ``transform`` accepts an :class:`SlcStack` and returns the ``(n_pixels, M)``
    matrix of its valid region in row-major pixel order.
    """

    def __init__(self, window=49):
        self.window = window

    def fit(self, X, y=None):
        _check_window(self.window)
        self.n_features_out_ = feature_dimension(X.geometry.n_baselines)
        return self

    def transform(self, X):
        return build_feature_grid(X, self.window).as_matrix()


# --------------------------------------------------------------------- I/O


def write_feature_grid(grid: FeatureGrid, path: str | Path) -> None:
    base = Path(str(path).removesuffix(".hdr.json").removesuffix(".f32"))
    base.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "rows": grid.rows,
        "cols": grid.cols,
        "M": grid.n_features,
        "valid_offset": grid.valid_offset,
        "window": grid.window,
    }
    Path(f"{base}.hdr.json").write_text(json.dumps(header) + "\n")
    np.ascontiguousarray(grid.values, dtype="<f4").tofile(f"{base}.f32")


def read_feature_grid(path: str | Path) -> FeatureGrid:
    base = Path(str(path).removesuffix(".hdr.json").removesuffix(".f32"))
    hdr = Path(f"{base}.hdr.json")
    if not hdr.exists():
        raise FormatError(f"missing header {hdr}")
    header = json.loads(hdr.read_text())
    shape = (int(header["rows"]), int(header["cols"]), int(header["M"]))
    data = Path(f"{base}.f32")
    expected = 4 * shape[0] * shape[1] * shape[2]
    if not data.exists() or data.stat().st_size != expected:
        raise FormatError(f"{data}: expected {expected} bytes")
    values = np.fromfile(data, dtype="<f4").astype(np.float32).reshape(shape)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{data}: non-finite feature value")
    return FeatureGrid(values, valid_offset=int(header["valid_offset"]), window=int(header["window"]))


def export_feature_csv(grid: FeatureGrid, path: str | Path) -> None:
    header = ",".join(f"f{i}" for i in range(grid.n_features))
    np.savetxt(path, grid.as_matrix(), delimiter=",", header=header, comments="", fmt="%.9g")
