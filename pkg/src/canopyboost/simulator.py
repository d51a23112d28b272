"""Synthetic multi-baseline polarimetric SLC stacks with known ground truth.

Each pixel is a two-layer scene: a ground phase center at ``z_ground`` plus an
exponentially weighted volume of height ``canopy_height`` above it. The
polarimetric signatures of both layers are diagonal power matrices. One
circular complex Gaussian draw per pixel gives single-look speckle; optional
per-track smooth phase screens emulate uncalibrated data.

Random streams are derived from ``(seed, purpose, index)`` through
``SeedSequence`` spawn keys feeding a counter-based Philox generator, so every
row is simulated identically no matter how the work is chunked.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable

import numpy as np
from scipy.ndimage import gaussian_filter

from .features import CovarianceMatrix
from .sardata import N_POL, AcquisitionGeometry, HeightRaster, SlcStack

_STREAM_DTM = 0
_STREAM_CANOPY = 1
_STREAM_SCREEN = 2
_STREAM_SPECKLE = 3

CHOLESKY_JITTER = 1e-9
_SCREEN_COMPONENTS = 256


@dataclass(frozen=True)
class SceneSpec:
    rows: int = 512
    cols: int = 512
    dtm_range: tuple[float, float] = (0.0, 40.0)
    canopy_range: tuple[float, float] = (0.0, 60.0)
    terrain_correlation_length: float = 96.0
    canopy_correlation_length: float = 16.0
    ground_pol_powers: tuple[float, float, float] = (1.0, 0.1, 0.7)
    volume_pol_powers: tuple[float, float, float] = (0.4, 0.3, 0.4)
    ground_to_volume_ratio: float = 0.5
    extinction: float = 0.015
    phase_screen_sigma: float = 1.0
    # much longer than the scene: per-track offsets plus gentle ramps
    phase_screen_correlation_length: float = 8192.0
    seed: int = 0

    def __post_init__(self):
        for name in ("dtm_range", "canopy_range", "ground_pol_powers", "volume_pol_powers"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.rows < 0 or self.cols < 0:
            raise ValueError("scene dimensions must be non-negative")
        for name in ("dtm_range", "canopy_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} must satisfy min <= max")
        if self.canopy_range[0] < 0:
            raise ValueError("canopy heights must be non-negative")
        if len(self.ground_pol_powers) != N_POL or len(self.volume_pol_powers) != N_POL:
            raise ValueError("polarimetric powers need one value per HH, HV, VV")
        if min(self.ground_pol_powers + self.volume_pol_powers) < 0:
            raise ValueError("polarimetric powers must be non-negative")
        if self.ground_to_volume_ratio < 0:
            raise ValueError("ground_to_volume_ratio must be non-negative")
        if self.extinction < 0:
            raise ValueError("extinction must be non-negative")
        if self.phase_screen_sigma < 0:
            raise ValueError("phase_screen_sigma must be non-negative")
        if min(self.terrain_correlation_length, self.canopy_correlation_length,
               self.phase_screen_correlation_length) < 0:
            raise ValueError("correlation lengths must be non-negative")

    @property
    def calibrated(self) -> bool:
        return self.phase_screen_sigma == 0

    def replace(self, **changes) -> "SceneSpec":
        params = asdict(self)
        params.update(changes)
        return SceneSpec(**params)

    @classmethod
    def from_mapping(cls, mapping: dict) -> "SceneSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown scene parameters: {sorted(unknown)}")
        return cls(**mapping)


def vertical_wavenumbers(geometry: AcquisitionGeometry) -> np.ndarray:
    """kz per track in rad/m, baselines taken as perpendicular baselines."""
    b = np.asarray(geometry.baselines, dtype=float)
    if len(set(b.tolist())) != len(b):
        raise ValueError("baselines must be pairwise distinct")
    r = geometry.slant_range
    return 4 * np.pi * (b - b[0]) / (geometry.wavelength * r * math.sin(geometry.incidence_angle))


def fourier_resolution(geometry: AcquisitionGeometry) -> float:
    kz = vertical_wavenumbers(geometry)
    return 2 * np.pi / float(np.ptp(kz))


def _exprel(x: np.ndarray) -> np.ndarray:
    """(e^x - 1) / x for complex x, with its limit 1 at x = 0."""
    x = np.asarray(x, dtype=np.complex128)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x / 2 + x * x / 6, np.expm1(safe) / safe)


def _integral_ratio(a: np.ndarray, p: float, h: np.ndarray) -> np.ndarray:
    """int_0^h e^{a z} dz / int_0^h e^{p z} dz, elementwise, equal to 1 at h = 0."""
    h = np.asarray(h, dtype=float)
    a = np.asarray(a, dtype=np.complex128)
    return _exprel(a * h) / _exprel(p * h).real


def _layer_matrices(z_ground, canopy_height, kz, p):
    """Ground steering outer products and normalized volume coherences, shape (P, Nb, Nb)."""
    z = np.atleast_1d(np.asarray(z_ground, dtype=float))
    h = np.atleast_1d(np.asarray(canopy_height, dtype=float))
    dk = kz[:, None] - kz[None, :]
    ground = np.exp(1j * dk[None] * z[:, None, None])
    volume = ground * _integral_ratio(p + 1j * dk[None], p, h[:, None, None])
    return ground, volume


def _assemble(ground, volume, spec: SceneSpec) -> np.ndarray:
    """R[3m+p, 3n+q] = delta_pq (mu Cg[p] G[m,n] + Cv[p] V[m,n])."""
    n_pix, nb, _ = ground.shape
    R = np.zeros((n_pix, nb, N_POL, nb, N_POL), dtype=np.complex128)
    mu = spec.ground_to_volume_ratio
    for pol in range(N_POL):
        R[:, :, pol, :, pol] = (
            mu * spec.ground_pol_powers[pol] * ground + spec.volume_pol_powers[pol] * volume
        )
    return R.reshape(n_pix, nb * N_POL, nb * N_POL)


def _extinction_exponent(spec: SceneSpec, geometry: AcquisitionGeometry) -> float:
    return 2 * spec.extinction / math.cos(geometry.incidence_angle)


def pixel_covariance_model(
    z_ground: float, canopy_height: float, spec: SceneSpec, geometry: AcquisitionGeometry
) -> CovarianceMatrix:
    if canopy_height < 0:
        raise ValueError("canopy height must be non-negative")
    kz = vertical_wavenumbers(geometry)
    ground, volume = _layer_matrices(z_ground, canopy_height, kz, _extinction_exponent(spec, geometry))
    return CovarianceMatrix(_assemble(ground, volume, spec)[0], window=1)


def covariance_model_batch(z_ground, canopy_height, spec, geometry) -> np.ndarray:
    """Vectorized :func:`pixel_covariance_model` returning raw ``(P, 3Nb, 3Nb)`` arrays."""
    kz = vertical_wavenumbers(geometry)
    ground, volume = _layer_matrices(z_ground, canopy_height, kz, _extinction_exponent(spec, geometry))
    return _assemble(ground, volume, spec)


def _stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def smooth_field(rows: int, cols: int, correlation_length: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian-filtered white noise (unnormalized)."""
    noise = rng.standard_normal((rows, cols))
    if correlation_length > 0 and rows and cols:
        noise = gaussian_filter(noise, sigma=correlation_length, mode="reflect")
    return noise


def _rescale(field: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if field.size == 0 or lo == hi:
        return np.full(field.shape, lo)
    fmin, fmax = field.min(), field.max()
    if fmax == fmin:
        return np.full(field.shape, 0.5 * (lo + hi))
    out = lo + (field - fmin) * ((hi - lo) / (fmax - fmin))
    return np.clip(out, lo, hi)


def _ground_truth_fields(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    dtm = smooth_field(spec.rows, spec.cols, spec.terrain_correlation_length, _stream(spec.seed, _STREAM_DTM))
    canopy = smooth_field(spec.rows, spec.cols, spec.canopy_correlation_length, _stream(spec.seed, _STREAM_CANOPY))
    return _rescale(dtm, *spec.dtm_range), _rescale(canopy, *spec.canopy_range)


def generate_ground_truth(spec: SceneSpec) -> tuple[HeightRaster, HeightRaster]:
    """DTM and top-of-canopy CHM (ground + canopy height) rasters."""
    z_ground, canopy = _ground_truth_fields(spec)
    return HeightRaster(z_ground, kind="DTM"), HeightRaster(z_ground + canopy, kind="CHM")


def stationary_field(rows: int, cols: int, correlation_length: float, rng: np.random.Generator,
                     n_components: int = _SCREEN_COMPONENTS) -> np.ndarray:
    """Zero-mean unit-variance random field with covariance ``exp(-d^2 / (4 L^2))``.

    This is the covariance of white noise filtered by a Gaussian of width
    ``L``, but normalized as a process rather than per realization, so a
    field much smoother than the scene stays close to a constant offset.
    Built from random Fourier features as a rank-``n_components`` product.
    """
    if correlation_length <= 0:
        return rng.standard_normal((rows, cols))
    scale = 1.0 / (math.sqrt(2.0) * correlation_length)
    w_row = rng.normal(0.0, scale, n_components)
    w_col = rng.normal(0.0, scale, n_components)
    phase = rng.uniform(0.0, 2.0 * np.pi, n_components)
    u = np.exp(1j * (np.arange(rows)[:, None] * w_row + phase))
    v = np.exp(1j * (np.arange(cols)[:, None] * w_col))
    return math.sqrt(2.0 / n_components) * (u @ v.T).real


def phase_screens(spec: SceneSpec, n_baselines: int) -> np.ndarray:
    """Per-track phase error fields, shape ``(Nb, rows, cols)``; track 0 is identically zero.

    Track ``n > 0`` gets ``phase_screen_sigma`` times an independent
    :func:`stationary_field`, so ``phase_screen_sigma`` is the pointwise
    standard deviation of the error process.
    """
    screens = np.zeros((n_baselines, spec.rows, spec.cols))
    if spec.phase_screen_sigma == 0 or spec.rows * spec.cols == 0:
        return screens
    for n in range(1, n_baselines):
        f = stationary_field(spec.rows, spec.cols, spec.phase_screen_correlation_length,
                             _stream(spec.seed, _STREAM_SCREEN, n))
        screens[n] = spec.phase_screen_sigma * f
    return screens


def draw_speckle(R: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One circular complex Gaussian vector per covariance in the batch ``R``."""
    n_pix, k, _ = R.shape
    tr = np.real(np.trace(R, axis1=1, axis2=2))
    jitter = CHOLESKY_JITTER * np.maximum(tr, np.finfo(float).tiny)
    L = np.linalg.cholesky(R + jitter[:, None, None] * np.eye(k))
    w = rng.standard_normal((n_pix, k, 2)) @ np.array([1.0, 1j]) / np.sqrt(2.0)
    return np.einsum("pij,pj->pi", L, w)


def simulate_stack(
    spec: SceneSpec, geometry: AcquisitionGeometry | None = None
) -> tuple[SlcStack, HeightRaster, HeightRaster]:
    """Single-look SLC stack with its DTM and CHM; ``geometry`` defaults to the six-track one."""
    geometry = geometry or AcquisitionGeometry.six_track()
    z_ground, canopy = _ground_truth_fields(spec)
    kz = vertical_wavenumbers(geometry)
    p = _extinction_exponent(spec, geometry)
    nb, k = geometry.n_baselines, geometry.n_channels
    samples = np.empty((k, spec.rows, spec.cols), dtype=np.complex128)
    for row in range(spec.rows):
        ground, volume = _layer_matrices(z_ground[row], canopy[row], kz, p)
        R = _assemble(ground, volume, spec)
        samples[:, row, :] = draw_speckle(R, _stream(spec.seed, _STREAM_SPECKLE, row)).T
    if spec.phase_screen_sigma > 0:
        screens = phase_screens(spec, nb)
        for n in range(1, nb):
            samples[N_POL * n : N_POL * (n + 1)] *= np.exp(1j * screens[n])[None]
    dtm = HeightRaster(z_ground, kind="DTM")
    chm = HeightRaster(z_ground + canopy, kind="CHM")
    return SlcStack(geometry, samples), dtm, chm


def fourier_profile(
    R: CovarianceMatrix | np.ndarray, z_grid: Iterable[float], geometry: AcquisitionGeometry
) -> np.ndarray:
    """Beamformer power of the HV sub-covariance along ``z_grid``."""
    entries = R.entries if isinstance(R, CovarianceMatrix) else np.asarray(R, dtype=np.complex128)
    z = np.asarray(list(z_grid), dtype=float)
    if z.size == 0:
        raise ValueError("z_grid must be non-empty")
    scale = max(float(np.max(np.abs(entries))), np.finfo(float).tiny)
    if np.max(np.abs(entries - entries.conj().T)) > 1e-12 * scale:
        raise ValueError("covariance is not Hermitian")
    kz = vertical_wavenumbers(geometry)
    hv = entries[1::N_POL, 1::N_POL]
    a = np.exp(1j * np.outer(z, kz)) / np.sqrt(len(kz))
    return np.real(np.einsum("zi,ij,zj->z", a.conj(), hv, a))
