"""Evaluation: splits, metrics, pipeline runs, sweeps and report files."""
from .experiment import (
    CALIBRATED,
    CLASSIFICATION,
    PARADIGMS,
    REGRESSION,
    UNCALIBRATED,
    ExperimentConfig,
    ExperimentResult,
    SweepTable,
    centered_patch,
    fit_model,
    predict_heights,
    row_label,
    run_experiment,
    window_sweep,
)
from .metrics import JointHistogram, TimingReport, distinct_value_count, joint_histogram, rmse, time_run, traceline
from .report import histogram_csv, histogram_svg, traceline_csv, write_text
from .splits import SplitSpec, split_dataset, split_indices

__all__ = [
    "CALIBRATED", "CLASSIFICATION", "PARADIGMS", "REGRESSION", "UNCALIBRATED",
    "ExperimentConfig", "ExperimentResult", "SweepTable", "centered_patch", "fit_model",
    "predict_heights", "row_label", "run_experiment", "window_sweep",
    "JointHistogram", "TimingReport", "distinct_value_count", "joint_histogram", "rmse",
    "time_run", "traceline", "histogram_csv", "histogram_svg", "traceline_csv", "write_text",
    "SplitSpec", "split_dataset", "split_indices",
]
