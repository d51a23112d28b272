"""Core data containers and binary I/O for SLC stacks and height rasters.

On-disk formats are little-endian float32, row-major. Complex samples are
stored as interleaved (re, im) pairs.

Stack directory::

    meta.json            {wavelength_m, flight_height_m, incidence_rad,
                          baselines_m, rows, cols}
    b{n}_p{HH|HV|VV}.cf32

Raster::

    {name}.hdr.json      {rows, cols, kind, valid_offset}
    {name}.f32
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

POLARIZATIONS = ("HH", "HV", "VV")
N_POL = len(POLARIZATIONS)

_F32 = np.dtype("<f4")


class FormatError(ValueError):
    """Raised when an on-disk artifact violates its format contract."""


def channel_index(baseline: int, pol: int) -> int:
    return N_POL * baseline + pol


def channel_name(channel: int) -> str:
    n, p = divmod(channel, N_POL)
    return f"b{n}_p{POLARIZATIONS[p]}"


@dataclass(frozen=True)
class AcquisitionGeometry:
    """Airborne multi-baseline acquisition parameters.

    ``baselines`` are in meters with the master track first (value 0).
    ``incidence_angle`` is in radians.
    """

    wavelength: float
    flight_height: float
    incidence_angle: float
    baselines: tuple[float, ...]
    range_resolution: float = 1.0
    azimuth_resolution: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "baselines", tuple(float(b) for b in self.baselines))
        if len(self.baselines) < 2:
            raise ValueError("at least two baselines are required")
        if len(set(self.baselines)) != len(self.baselines):
            raise ValueError(f"baselines must be pairwise distinct, got {self.baselines}")
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not 0 < self.incidence_angle < math.pi / 2:
            raise ValueError("incidence angle must lie in (0, pi/2)")

    @property
    def n_baselines(self) -> int:
        return len(self.baselines)

    @property
    def n_channels(self) -> int:
        return N_POL * len(self.baselines)

    @property
    def slant_range(self) -> float:
        return self.flight_height / math.cos(self.incidence_angle)

    @classmethod
    def six_track(cls) -> "AcquisitionGeometry":
        """P-band airborne geometry with six tracks."""
        return cls(
            wavelength=0.7542,
            flight_height=3962.0,
            incidence_angle=math.radians(35.061),
            baselines=(0.0, -14.0, -30.0, -44.0, -60.0, -75.0),
            range_resolution=1.0,
            azimuth_resolution=1.245,
        )


@dataclass(frozen=True, eq=False)
class SlcStack:
    """Complex samples indexed ``(channel, row, col)`` with channel = 3n + p."""

    geometry: AcquisitionGeometry
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.ndim != 3:
            raise ValueError("samples must be a (channel, row, col) array")
        if samples.shape[0] != self.geometry.n_channels:
            raise ValueError(
                f"expected {self.geometry.n_channels} channels, got {samples.shape[0]}"
            )
        if samples.dtype not in (np.complex64, np.complex128):
            samples = samples.astype(np.complex128)
        if not np.all(np.isfinite(samples)):
            raise ValueError("stack contains non-finite samples")
        samples = samples.view()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def rows(self) -> int:
        return self.samples.shape[1]

    @property
    def cols(self) -> int:
        return self.samples.shape[2]

    def channel(self, baseline: int, pol: int) -> np.ndarray:
        return self.samples[channel_index(baseline, pol)]


@dataclass(frozen=True, eq=False)
class HeightRaster:
    """Heights in meters on the pixel grid.

    ``valid_offset`` is the margin (in pixels of the original scene) cropped
    away by a windowed operation; 0 for raw rasters.
    """

    values: np.ndarray
    kind: str = "CHM"
    valid_offset: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise ValueError("raster values must be 2-D")
        if self.kind not in ("CHM", "DTM"):
            raise ValueError(f"unknown raster kind {self.kind!r}")
        if not np.all(np.isfinite(values)):
            raise ValueError("raster contains non-finite values")
        if self.kind == "CHM" and values.size and values.min() < 0:
            raise ValueError("CHM heights must be non-negative")
        if self.valid_offset < 0:
            raise ValueError("valid_offset must be non-negative")
        values = values.view()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


# --------------------------------------------------------------------- I/O


def _read_f32(path: Path, count: int) -> np.ndarray:
    if not path.exists():
        raise FormatError(f"missing file {path}")
    nbytes = path.stat().st_size
    if nbytes != count * _F32.itemsize:
        raise FormatError(
            f"{path.name}: expected {count * _F32.itemsize} bytes, found {nbytes}"
        )
    return np.fromfile(path, dtype=_F32, count=count)


def write_stack(stack: SlcStack, path: str | Path) -> None:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    g = stack.geometry
    meta = {
        "wavelength_m": g.wavelength,
        "flight_height_m": g.flight_height,
        "incidence_rad": g.incidence_angle,
        "baselines_m": list(g.baselines),
        "range_resolution_m": g.range_resolution,
        "azimuth_resolution_m": g.azimuth_resolution,
        "rows": stack.rows,
        "cols": stack.cols,
    }
    (path / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    for ch in range(g.n_channels):
        data = np.ascontiguousarray(stack.samples[ch], dtype=np.complex64)
        # complex64 is already interleaved (re, im) float32
        data.view(np.float32).astype(_F32, copy=False).tofile(path / f"{channel_name(ch)}.cf32")


def read_stack(path: str | Path) -> SlcStack:
    path = Path(path)
    meta_path = path / "meta.json"
    if not meta_path.exists():
        raise FormatError(f"missing descriptor {meta_path}")
    meta = json.loads(meta_path.read_text())
    geometry = AcquisitionGeometry(
        wavelength=meta["wavelength_m"],
        flight_height=meta["flight_height_m"],
        incidence_angle=meta["incidence_rad"],
        baselines=meta["baselines_m"],
        range_resolution=meta.get("range_resolution_m", 1.0),
        azimuth_resolution=meta.get("azimuth_resolution_m", 1.0),
    )
    rows, cols = int(meta["rows"]), int(meta["cols"])
    samples = np.empty((geometry.n_channels, rows, cols), dtype=np.complex64)
    for ch in range(geometry.n_channels):
        flat = _read_f32(path / f"{channel_name(ch)}.cf32", 2 * rows * cols)
        samples[ch] = flat.astype(np.float32).view(np.complex64).reshape(rows, cols)
    if not np.all(np.isfinite(samples)):
        raise FormatError(f"{path}: non-finite sample in stack")
    return SlcStack(geometry, samples)


def _split_name(path: str | Path) -> Path:
    path = Path(path)
    for suffix in (".hdr.json", ".f32"):
        if path.name.endswith(suffix):
            return path.with_name(path.name[: -len(suffix)])
    return path


def write_raster(raster: HeightRaster, path: str | Path) -> None:
    base = _split_name(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "rows": raster.rows,
        "cols": raster.cols,
        "kind": raster.kind,
        "valid_offset": raster.valid_offset,
    }
    Path(f"{base}.hdr.json").write_text(json.dumps(header) + "\n")
    np.ascontiguousarray(raster.values, dtype=_F32).tofile(f"{base}.f32")


def read_raster(path: str | Path) -> HeightRaster:
    base = _split_name(path)
    hdr_path = Path(f"{base}.hdr.json")
    if not hdr_path.exists():
        raise FormatError(f"missing header {hdr_path}")
    header = json.loads(hdr_path.read_text())
    rows, cols = int(header["rows"]), int(header["cols"])
    values = _read_f32(Path(f"{base}.f32"), rows * cols).astype(np.float32)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{base}.f32: non-finite height value")
    return HeightRaster(
        values.reshape(rows, cols),
        kind=header["kind"],
        valid_offset=int(header.get("valid_offset", 0)),
    )


def geometry_from_baselines(baselines: Sequence[float], **kwargs) -> AcquisitionGeometry:
    """Default airborne geometry with a different baseline list."""
    base = AcquisitionGeometry.six_track()
    params = dict(
        wavelength=base.wavelength,
        flight_height=base.flight_height,
        incidence_angle=base.incidence_angle,
        range_resolution=base.range_resolution,
        azimuth_resolution=base.azimuth_resolution,
    )
    params.update(kwargs)
    return AcquisitionGeometry(baselines=tuple(baselines), **params)
