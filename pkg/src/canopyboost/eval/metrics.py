"""Scalar metrics, joint distributions, profiles and timing."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..sardata import HeightRaster


def rmse(pred, ref) -> float:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    ref = np.asarray(ref, dtype=np.float64).ravel()
    if pred.shape != ref.shape:
        raise ValueError("pred and ref differ in length")
    if pred.size == 0:
        raise ValueError("rmse of an empty input")
    return math.sqrt(float(np.mean((pred - ref) ** 2)))


@dataclass(frozen=True, eq=False)
class JointHistogram:
    """2-D counts with axis 0 = reference height and axis 1 = prediction."""

    counts: np.ndarray
    edges: np.ndarray

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    @property
    def value_range(self) -> tuple[float, float]:
        return float(self.edges[0]), float(self.edges[-1])

    def diagonal_fraction(self) -> float:
        total = self.counts.sum()
        return float(np.trace(self.counts) / total) if total else 0.0


def joint_histogram(pred, ref, bins: int = 100, value_range=(0.0, 80.0)) -> JointHistogram:
    pred = np.asarray(pred, dtype=np.float64).ravel()
    ref = np.asarray(ref, dtype=np.float64).ravel()
    if pred.shape != ref.shape:
        raise ValueError("pred and ref differ in length")
    if pred.size == 0:
        raise ValueError("joint histogram of an empty input")
    lo, hi = map(float, value_range)
    if not hi > lo:
        raise ValueError("value range must be non-degenerate")
    edges = np.linspace(lo, hi, bins + 1)

    def index(v):
        return np.clip(np.floor((v - lo) / (hi - lo) * bins).astype(np.int64), 0, bins - 1)

    counts = np.zeros((bins, bins), dtype=np.int64)
    np.add.at(counts, (index(ref), index(pred)), 1)
    return JointHistogram(counts, edges)


def traceline(raster: HeightRaster | np.ndarray, row: int) -> np.ndarray:
    """Values of one raster row (0-based) in column order."""
    values = raster.values if isinstance(raster, HeightRaster) else np.asarray(raster)
    if values.ndim == 1:
        values = values[None, :]
    if not 0 <= row < values.shape[0]:
        raise IndexError(f"row {row} outside raster with {values.shape[0]} rows")
    return np.array(values[row], copy=True)


def distinct_value_count(pred) -> int:
    pred = np.asarray(pred).ravel()
    if pred.size == 0:
        raise ValueError("distinct values of an empty input")
    return int(np.unique(pred).size)


@dataclass
class TimingReport:
    train_seconds: float = 0.0
    test_seconds: float = 0.0
    n_train: int = 0
    n_test: int = 0
    model_leaf_count: int = 0
    threads: int = 1

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())


def time_run(stage, *args, **kwargs):
    """Run ``stage(*args, **kwargs)``; returns ``(result, wall-clock seconds)``."""
    start = time.perf_counter()
    result = stage(*args, **kwargs)
    return result, max(0.0, time.perf_counter() - start)
