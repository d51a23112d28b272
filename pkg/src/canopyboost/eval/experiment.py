"""Single pipeline runs and window-size sweeps on a simulated or loaded scene."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numba
import numpy as np

from ..features import average_raster, build_feature_grid
from ..gbdt import (
    WEIGHTED_MULTICLASS,
    WEIGHTED_RMSE,
    GbdtHyperparams,
    GbdtModel,
    TrainingSet,
    class_weights,
    predict,
    quantize_labels,
    train,
)
from ..sardata import HeightRaster, SlcStack
from .metrics import TimingReport, distinct_value_count, rmse, time_run
from .splits import SplitSpec, split_indices

REGRESSION = "regression"
CLASSIFICATION = "classification"
PARADIGMS = (REGRESSION, CLASSIFICATION)
CALIBRATED = "C"
UNCALIBRATED = "NC"
TEST_PATCH_SIZE = 280


def centered_patch(rows: int, cols: int, size: int = TEST_PATCH_SIZE) -> tuple[int, int, int, int]:
    """Square patch ``(row0, col0, size, size)`` centered in a ``rows x cols`` scene."""
    if size > min(rows, cols):
        raise ValueError(f"a {size}x{size} patch does not fit a {rows}x{cols} scene")
    return ((rows - size) // 2, (cols - size) // 2, size, size)


@dataclass(frozen=True)
class ExperimentConfig:
    """One train/test run.

    ``scene_patch`` is the test rectangle in scene pixel coordinates; None
    means a centered 280x280 patch. Keeping it in scene coordinates means the
    same ground pixels are tested whatever the window size.
    """

    window: int = 49
    paradigm: str = REGRESSION
    scene_patch: tuple[int, int, int, int] | None = None
    validation_fraction: float = 0.2
    split_seed: int = 0
    bin_width: float = 1.0
    height_range: tuple[float, float] | None = None
    hyperparams: GbdtHyperparams = field(default_factory=GbdtHyperparams)

    def __post_init__(self):
        if self.paradigm not in PARADIGMS:
            raise ValueError(f"paradigm must be one of {PARADIGMS}, got {self.paradigm!r}")

    def split_spec(self, scene_shape, valid_offset: int) -> SplitSpec:
        patch = self.scene_patch or centered_patch(*scene_shape)
        return SplitSpec.from_scene_patch(
            patch, valid_offset, validation_fraction=self.validation_fraction, seed=self.split_seed)


@dataclass(eq=False)
class ExperimentResult:
    model: GbdtModel
    prediction: HeightRaster
    reference: HeightRaster
    timing: TimingReport
    history: list

    @property
    def rmse(self) -> float:
        return rmse(self.prediction.values, self.reference.values)

    @property
    def target_std(self) -> float:
        return float(np.std(self.reference.values.astype(np.float64)))

    @property
    def distinct_values(self) -> int:
        return distinct_value_count(self.prediction.values)


def fit_model(train_set: TrainingSet, validation: TrainingSet, config: ExperimentConfig,
              n_threads: int | None = None, history: list | None = None) -> GbdtModel:
    """Train the configured paradigm; heights in ``targets`` are quantized for classification."""
    if config.paradigm == REGRESSION:
        hp = replace(config.hyperparams, loss=WEIGHTED_RMSE)
        return train(train_set, validation, hp, n_threads=n_threads, history=history)
    hp = replace(config.hyperparams, loss=WEIGHTED_MULTICLASS)
    labels, qmap = quantize_labels(train_set.targets, config.bin_width, config.height_range)
    T = qmap.n_classes
    labelled = TrainingSet(train_set.features, labels, class_weights(labels, T))
    val = None
    if validation is not None and len(validation):
        vl = qmap.classes(validation.targets)
        val = TrainingSet(validation.features, vl, class_weights(vl, T))
    return train(labelled, val, hp, n_classes=T, quantization=qmap, n_threads=n_threads, history=history)


def predict_heights(model: GbdtModel, features, n_threads: int | None = None) -> np.ndarray:
    """Heights in meters: regression output, or the bin center of the argmax class."""
    out = predict(model, features, n_threads=n_threads)
    if model.loss == WEIGHTED_RMSE:
        return out
    return out[0]


def run_experiment(stack: SlcStack, target: HeightRaster, config: ExperimentConfig,
                   n_threads: int | None = None) -> ExperimentResult:
    """Features, averaged target, split, train and test-patch prediction for one window."""
    grid = build_feature_grid(stack, config.window)
    averaged = average_raster(target, config.window)
    spec = config.split_spec((stack.rows, stack.cols), grid.valid_offset)
    train_idx, val_idx, test_idx = split_indices((grid.rows, grid.cols), spec)
    X = grid.as_matrix()
    y = averaged.values.ravel().astype(np.float64)
    history: list = []
    model, t_train = time_run(
        fit_model, TrainingSet(X[train_idx], y[train_idx]), TrainingSet(X[val_idx], y[val_idx]),
        config, n_threads=n_threads, history=history)
    pred, t_test = time_run(predict_heights, model, X[test_idx], n_threads=n_threads)
    rows, cols = spec.test_patch[2:]
    offset = grid.valid_offset + spec.test_patch[0]
    timing = TimingReport(t_train, t_test, train_idx.size, test_idx.size, model.leaf_count,
                          threads=n_threads or numba.get_num_threads())
    return ExperimentResult(
        model=model,
        prediction=HeightRaster(pred.reshape(rows, cols), kind=target.kind, valid_offset=offset),
        reference=HeightRaster(y[test_idx].reshape(rows, cols), kind=target.kind, valid_offset=offset),
        timing=timing,
        history=history,
    )


@dataclass
class SweepTable:
    """RMSE per configuration: one row per ``Paradigm-Calibration``, one column per window."""

    windows: list
    rows: list
    rmse: np.ndarray

    def value(self, row: str, window: int) -> float:
        return float(self.rmse[self.rows.index(row), self.windows.index(window)])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["configuration"] + [f"{W}x{W}" for W in self.windows])
        for name, values in zip(self.rows, self.rmse):
            w.writerow([name] + [f"{v:.6g}" for v in values])
        return buf.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv())


def row_label(paradigm: str, calibration: str) -> str:
    return f"{paradigm.capitalize()}-{calibration}"


def window_sweep(stacks: dict, target: HeightRaster, windows, paradigms=PARADIGMS,
                 calibrations=(UNCALIBRATED, CALIBRATED), config: ExperimentConfig | None = None,
                 n_threads: int | None = None) -> SweepTable:
    """RMSE table over windows x paradigms x calibrations.

    ``stacks`` maps ``"C"``/``"NC"`` to SLC stacks of the same scene. Every
    run tests the same scene patch.
    """
    windows = [int(W) for W in windows]
    if any(W % 2 == 0 for W in windows):
        raise ValueError("windows must be odd")
    config = config or ExperimentConfig()
    rows, values = [], []
    for paradigm in paradigms:
        for cal in calibrations:
            if cal not in stacks:
                raise KeyError(f"no stack for calibration {cal!r}")
            rows.append(row_label(paradigm, cal))
            values.append([
                run_experiment(stacks[cal], target, replace(config, window=W, paradigm=paradigm),
                               n_threads=n_threads).rmse
                for W in windows
            ])
    return SweepTable(windows, rows, np.array(values, dtype=np.float64).reshape(len(rows), len(windows)))
