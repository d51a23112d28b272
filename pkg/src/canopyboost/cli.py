"""Command-line pipeline: simulate, features, train, predict, evaluate, report.

Every stage reads and writes files under ``--out`` (default ``run``)::

    stack_nc/, stack_c/          SLC stacks (uncalibrated / calibrated)
    dtm.*, chm.*                 full-resolution ground truth
    features_{nc,c}.*            feature grid for one window
    dtm_avg.*, chm_avg.*         window-averaged ground truth aligned to the grid
    model_{chm,dtm}.json         trained model
    train_{chm,dtm}.json         split and training time
    pred_{chm,dtm}.*             prediction over the whole feature grid
    eval_{chm,dtm}/              metrics, joint histogram, tracelines, timing
    report/                      window-sweep tables and figures

A ``--config`` file holds ``key = value`` lines using the long flag names
(dashes or underscores); its values override the command line.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__

CALIBRATIONS = ("NC", "C")
TARGETS = ("CHM", "DTM")
TRACELINE_ROWS = (0, 159, 279)


class CliError(Exception):
    """Contract violation reported as a one-line diagnostic."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


# ---------------------------------------------------------------- value parsers

def _odd_window(text: str) -> int:
    W = int(text)
    if W < 1 or W % 2 == 0:
        raise argparse.ArgumentTypeError(f"window must be a positive odd integer, got {text}")
    return W


def _floats(count: int | None = None):
    def parse(text: str):
        values = tuple(float(v) for v in text.replace(" ", "").split(",") if v)
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
        return values
    return parse


def _ints(count: int | None = None):
    def parse(text: str):
        values = tuple(int(v) for v in text.replace(" ", "").split(",") if v)
        if count is not None and len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated integers, got {text!r}")
        return values
    return parse


def _windows(text: str):
    values = _ints()(text)
    if not values:
        raise argparse.ArgumentTypeError("empty window list")
    for W in values:
        _odd_window(str(W))
    return values


def _choices_list(options):
    def parse(text: str):
        values = tuple(v for v in text.replace(" ", "").split(",") if v)
        bad = [v for v in values if v not in options]
        if bad or not values:
            raise argparse.ArgumentTypeError(f"expected a comma-separated subset of {options}, got {text!r}")
        return values
    return parse


def _optional_int(text: str):
    return None if text.lower() in ("none", "off", "0") else int(text)


def _optional_float(text: str):
    return None if text.lower() == "none" else float(text)


# ---------------------------------------------------------------- parser

def _common(suppress: bool) -> argparse.ArgumentParser:
    # Subcommands repeat the global flags with suppressed defaults so a value
    # given before the subcommand is not reset by the subparser.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    p = _Parser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=default(0), help="scene and split seed (default 0)")
    g.add_argument("--threads", type=int, default=default(None), help="worker threads (default: all)")
    g.add_argument("--out", type=Path, default=default(Path("run")), help="working directory (default ./run)")
    g.add_argument("--config", type=Path, default=default(None), help="key=value file overriding flags")
    return p


def _add_scene(p):
    from .simulator import SceneSpec
    d = SceneSpec()
    g = p.add_argument_group("scene")
    g.add_argument("--rows", type=int, default=d.rows)
    g.add_argument("--cols", type=int, default=d.cols)
    g.add_argument("--dtm-range", type=_floats(2), default=d.dtm_range, metavar="LO,HI")
    g.add_argument("--canopy-range", type=_floats(2), default=d.canopy_range, metavar="LO,HI")
    g.add_argument("--terrain-correlation-length", type=float, default=d.terrain_correlation_length)
    g.add_argument("--canopy-correlation-length", type=float, default=d.canopy_correlation_length)
    g.add_argument("--ground-pol-powers", type=_floats(3), default=d.ground_pol_powers, metavar="HH,HV,VV")
    g.add_argument("--volume-pol-powers", type=_floats(3), default=d.volume_pol_powers, metavar="HH,HV,VV")
    g.add_argument("--ground-to-volume-ratio", type=float, default=d.ground_to_volume_ratio)
    g.add_argument("--extinction", type=float, default=d.extinction)
    g.add_argument("--phase-screen-sigma", type=float, default=d.phase_screen_sigma,
                   help="radians, used for the NC stack")
    g.add_argument("--phase-screen-correlation-length", type=float, default=d.phase_screen_correlation_length)
    g = p.add_argument_group("geometry")
    g.add_argument("--wavelength", type=float, default=None, help="meters")
    g.add_argument("--flight-height", type=float, default=None, help="meters")
    g.add_argument("--incidence-deg", type=float, default=None)
    g.add_argument("--baselines", type=_floats(), default=None, metavar="B0,B1,...")


def _add_model(p):
    from .gbdt import GbdtHyperparams
    d = GbdtHyperparams()
    g = p.add_argument_group("model")
    g.add_argument("--paradigm", choices=("regression", "classification"), default="regression")
    g.add_argument("--trees", type=int, default=d.num_trees)
    g.add_argument("--depth", type=int, default=d.depth)
    g.add_argument("--learning-rate", type=float, default=d.learning_rate)
    g.add_argument("--bins", type=int, default=d.histogram_bins)
    g.add_argument("--min-samples-leaf", type=int, default=d.min_samples_leaf)
    g.add_argument("--early-stopping-rounds", type=_optional_int, default=d.early_stopping_rounds)
    g.add_argument("--l2-reg", type=_optional_float, default=None)
    g.add_argument("--bin-width", type=float, default=1.0, help="classification height bin (m)")
    g.add_argument("--height-range", type=_floats(2), default=None, metavar="LO,HI",
                   help="classification class grid (default: training range)")


def _add_split(p):
    g = p.add_argument_group("split")
    g.add_argument("--test-patch", type=_ints(4), default=None, metavar="ROW0,COL0,ROWS,COLS",
                   help="scene pixel coordinates (default: centered 280x280)")
    g.add_argument("--validation-fraction", type=float, default=0.2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="canopyboost", description=__doc__.split("\n")[0], parents=[_common(False)])
    common = _common(True)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="simulate SLC stacks and ground truth")
    _add_scene(p)
    p.add_argument("--calibration", choices=CALIBRATIONS + ("both",), default="both")

    p = sub.add_parser("features", parents=[common], help="feature grid and averaged ground truth")
    p.add_argument("--window", type=_odd_window, default=49)
    p.add_argument("--calibration", choices=CALIBRATIONS, default="NC")
    p.add_argument("--stack", type=Path, default=None)

    p = sub.add_parser("train", parents=[common], help="fit a model on the training split")
    p.add_argument("--target", choices=TARGETS, default="CHM")
    p.add_argument("--calibration", choices=CALIBRATIONS, default="NC")
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--model", type=Path, default=None)
    _add_model(p)
    _add_split(p)

    p = sub.add_parser("predict", parents=[common], help="predict heights over the feature grid")
    p.add_argument("--target", choices=TARGETS, default="CHM")
    p.add_argument("--calibration", choices=CALIBRATIONS, default="NC")
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--prediction", type=Path, default=None)

    p = sub.add_parser("evaluate", parents=[common], help="test-patch metrics and figures")
    p.add_argument("--target", choices=TARGETS, default="CHM")
    p.add_argument("--calibration", choices=CALIBRATIONS, default="NC")
    p.add_argument("--features", type=Path, default=None)
    p.add_argument("--model", type=Path, default=None)
    p.add_argument("--hist-bins", type=int, default=100)
    p.add_argument("--hist-range", type=_floats(2), default=None, metavar="LO,HI",
                   help="default 0,80 for CHM and the reference range for DTM")

    p = sub.add_parser("report", parents=[common], help="window sweep tables and figures")
    p.add_argument("--windows", type=_windows, default=(27, 31, 37, 41, 45, 49))
    p.add_argument("--paradigms", type=_choices_list(("regression", "classification")),
                   default=("classification", "regression"))
    p.add_argument("--calibrations", type=_choices_list(CALIBRATIONS), default=CALIBRATIONS)
    p.add_argument("--targets", type=_choices_list(TARGETS), default=TARGETS)
    _add_model(p)
    _add_split(p)
    return parser


def read_config(path: Path) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` tokens."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    tokens = []
    for number, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{number}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        tokens += ["--" + key.replace("_", "-"), " ".join(shlex.split(value))]
    return tokens


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    if args.config is not None:
        args = parser.parse_args(argv + read_config(args.config))
    return args


# ---------------------------------------------------------------- helpers

def _stack_dir(args, calibration):
    return args.out / f"stack_{calibration.lower()}"


def _features_path(args):
    return args.features or args.out / f"features_{args.calibration.lower()}"


def _model_path(args):
    return args.model or args.out / f"model_{args.target.lower()}.json"


def _train_record(args):
    return args.out / f"train_{args.target.lower()}.json"


def _geometry(args):
    from .sardata import AcquisitionGeometry, geometry_from_baselines
    base = AcquisitionGeometry.six_track()
    kw = {}
    if args.wavelength is not None:
        kw["wavelength"] = args.wavelength
    if args.flight_height is not None:
        kw["flight_height"] = args.flight_height
    if args.incidence_deg is not None:
        kw["incidence_angle"] = float(np.deg2rad(args.incidence_deg))
    if args.baselines is not None:
        return geometry_from_baselines(args.baselines, **{
            "wavelength": base.wavelength, "flight_height": base.flight_height,
            "incidence_angle": base.incidence_angle, **kw})
    return replace(base, **kw) if kw else base


def _scene(args):
    from .simulator import SceneSpec
    return SceneSpec(
        rows=args.rows, cols=args.cols, dtm_range=args.dtm_range, canopy_range=args.canopy_range,
        terrain_correlation_length=args.terrain_correlation_length,
        canopy_correlation_length=args.canopy_correlation_length,
        ground_pol_powers=args.ground_pol_powers, volume_pol_powers=args.volume_pol_powers,
        ground_to_volume_ratio=args.ground_to_volume_ratio, extinction=args.extinction,
        phase_screen_sigma=args.phase_screen_sigma,
        phase_screen_correlation_length=args.phase_screen_correlation_length, seed=args.seed,
    )


def _hyperparams(args):
    from .gbdt import GbdtHyperparams
    return GbdtHyperparams(
        num_trees=args.trees, depth=args.depth, learning_rate=args.learning_rate,
        histogram_bins=args.bins, min_samples_leaf=args.min_samples_leaf,
        early_stopping_rounds=args.early_stopping_rounds, l2_reg=args.l2_reg, seed=args.seed,
    )


def _experiment_config(args, window=49):
    from .eval import ExperimentConfig
    return ExperimentConfig(
        window=window, paradigm=args.paradigm,
        scene_patch=None if args.test_patch is None else tuple(args.test_patch),
        validation_fraction=args.validation_fraction, split_seed=args.seed,
        bin_width=args.bin_width, height_range=args.height_range, hyperparams=_hyperparams(args),
    )


def _require(path: Path, what: str, suffix: str = ""):
    if not Path(str(path) + suffix).exists():
        raise CliError(f"missing {what}: {path}{suffix} (run the upstream stage first)")


def _load_grid_and_target(args):
    from .features import read_feature_grid
    from .sardata import read_raster
    fpath = _features_path(args)
    _require(fpath, "feature grid", ".hdr.json")
    tpath = args.out / f"{args.target.lower()}_avg"
    _require(tpath, f"averaged {args.target}", ".hdr.json")
    grid = read_feature_grid(fpath)
    target = read_raster(tpath)
    if (grid.rows, grid.cols) != target.shape or grid.valid_offset != target.valid_offset:
        raise CliError(f"feature grid {fpath} and target {tpath} are not aligned")
    return grid, target


def _scene_shape(grid):
    return grid.rows + 2 * grid.valid_offset, grid.cols + 2 * grid.valid_offset


def _load_model(args, n_features):
    from .gbdt import load_model
    path = _model_path(args)
    _require(path, "model")
    model = load_model(path)
    if model.n_features != n_features:
        raise CliError(f"model expects {model.n_features} features, grid has {n_features}")
    return model


def _write_json(path: Path, doc: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- subcommands

def cmd_simulate(args):
    from .sardata import write_raster, write_stack
    from .simulator import simulate_stack
    spec = _scene(args)
    geometry = _geometry(args)
    wanted = CALIBRATIONS if args.calibration == "both" else (args.calibration,)
    args.out.mkdir(parents=True, exist_ok=True)
    for cal in wanted:
        s = spec if cal == "NC" else spec.replace(phase_screen_sigma=0.0)
        stack, dtm, chm = simulate_stack(s, geometry)
        write_stack(stack, _stack_dir(args, cal))
    write_raster(dtm, args.out / "dtm")
    write_raster(chm, args.out / "chm")
    print(f"seed={spec.seed} rows={spec.rows} cols={spec.cols} baselines={geometry.n_baselines} "
          f"stacks={','.join(wanted)} out={args.out}")


def cmd_features(args):
    from .features import average_raster, build_feature_grid, write_feature_grid
    from .sardata import read_raster, read_stack, write_raster
    stack_dir = args.stack or _stack_dir(args, args.calibration)
    _require(stack_dir / "meta.json", "SLC stack")
    stack = read_stack(stack_dir)
    if args.window > min(stack.rows, stack.cols):
        raise CliError(f"window {args.window} larger than the {stack.rows}x{stack.cols} scene")
    grid = build_feature_grid(stack, args.window)
    write_feature_grid(grid, args.out / f"features_{args.calibration.lower()}")
    for kind in TARGETS:
        path = args.out / kind.lower()
        if Path(str(path) + ".hdr.json").exists():
            write_raster(average_raster(read_raster(path), args.window), args.out / f"{kind.lower()}_avg")
    print(f"window={args.window} grid={grid.rows}x{grid.cols} features={grid.n_features}")


def cmd_train(args):
    from .eval import fit_model, split_indices, time_run
    from .gbdt import TrainingSet, save_model
    grid, target = _load_grid_and_target(args)
    config = _experiment_config(args, grid.window)
    spec = config.split_spec(_scene_shape(grid), grid.valid_offset)
    train_idx, val_idx, test_idx = split_indices((grid.rows, grid.cols), spec)
    X = grid.as_matrix()
    y = target.values.ravel().astype(np.float64)
    model, seconds = time_run(fit_model, TrainingSet(X[train_idx], y[train_idx]),
                              TrainingSet(X[val_idx], y[val_idx]), config, n_threads=args.threads)
    path = _model_path(args)
    save_model(model, path)
    _write_json(_train_record(args), {
        "test_patch": list(spec.test_patch), "validation_fraction": spec.validation_fraction,
        "seed": spec.seed, "n_train": int(train_idx.size), "n_validation": int(val_idx.size),
        "n_test": int(test_idx.size), "train_seconds": seconds, "trees": len(model.trees),
        "paradigm": config.paradigm, "window": grid.window,
    })
    print(f"model={path} trees={len(model.trees)} n_train={train_idx.size} seconds={seconds:.2f}")


def cmd_predict(args):
    from .eval import predict_heights
    from .features import read_feature_grid
    from .sardata import HeightRaster, write_raster
    fpath = _features_path(args)
    _require(fpath, "feature grid", ".hdr.json")
    grid = read_feature_grid(fpath)
    model = _load_model(args, grid.n_features)
    pred = predict_heights(model, grid.as_matrix(), n_threads=args.threads)
    raster = HeightRaster(pred.reshape(grid.rows, grid.cols), kind=args.target, valid_offset=grid.valid_offset)
    path = args.prediction or args.out / f"pred_{args.target.lower()}"
    write_raster(raster, path)
    print(f"prediction={path} grid={grid.rows}x{grid.cols}")


def _evaluation_files(out_dir: Path, pred, ref, kind: str, timing, hist_bins=100, hist_range=None,
                      title=""):
    from .eval import (distinct_value_count, histogram_csv, histogram_svg, joint_histogram, rmse,
                       traceline, traceline_csv, write_text)
    if hist_range is None:
        hist_range = (0.0, 80.0) if kind == "CHM" else (float(np.floor(ref.min())), float(np.ceil(ref.max())))
        if hist_range[1] <= hist_range[0]:
            hist_range = (hist_range[0], hist_range[0] + 1.0)
    hist = joint_histogram(pred, ref, hist_bins, hist_range)
    write_text(out_dir / "joint_histogram.csv", histogram_csv(hist))
    write_text(out_dir / "joint_histogram.svg", histogram_svg(hist, title or f"{kind} joint distribution"))
    for row in TRACELINE_ROWS:
        if row < ref.shape[0]:
            write_text(out_dir / f"traceline_row{row}.csv",
                       traceline_csv(traceline(ref, row), {"prediction": traceline(pred, row)}))
    metrics = {
        "target": kind, "rmse": rmse(pred, ref), "target_std": float(np.std(ref)),
        "distinct_values": distinct_value_count(pred), "n_test": int(ref.size),
        "bisector_fraction": hist.diagonal_fraction(),
    }
    _write_json(out_dir / "metrics.json", metrics)
    timing.write(out_dir / "timing.json")
    return metrics


def cmd_evaluate(args):
    from .eval import SplitSpec, TimingReport, predict_heights, time_run
    grid, target = _load_grid_and_target(args)
    model = _load_model(args, grid.n_features)
    rec_path = _train_record(args)
    _require(rec_path, "training record")
    record = json.loads(rec_path.read_text())
    spec = SplitSpec(tuple(record["test_patch"]))
    mask = spec.patch_mask((grid.rows, grid.cols))
    rows, cols = spec.test_patch[2:]
    X = grid.as_matrix()[mask.ravel()]
    pred, seconds = time_run(predict_heights, model, X, n_threads=args.threads)
    pred = pred.reshape(rows, cols)
    ref = target.values.astype(np.float64)[mask].reshape(rows, cols)
    import numba
    timing = TimingReport(record["train_seconds"], seconds, record["n_train"], int(mask.sum()),
                          model.leaf_count, threads=args.threads or numba.get_num_threads())
    out_dir = args.out / f"eval_{args.target.lower()}"
    metrics = _evaluation_files(out_dir, pred, ref, args.target, timing, args.hist_bins, args.hist_range)
    print(f"rmse={metrics['rmse']:.4f} std={metrics['target_std']:.4f} "
          f"distinct={metrics['distinct_values']} out={out_dir}")


def cmd_report(args):
    from .eval import row_label, run_experiment, SweepTable
    from .sardata import read_raster, read_stack
    stacks = {}
    for cal in args.calibrations:
        d = _stack_dir(args, cal)
        _require(d / "meta.json", f"{cal} SLC stack")
        stacks[cal] = read_stack(d)
    report_dir = args.out / "report"
    largest = max(args.windows)
    for kind in args.targets:
        path = args.out / kind.lower()
        _require(path, kind, ".hdr.json")
        truth = read_raster(path)
        rows, values = [], []
        for paradigm in args.paradigms:
            for cal in args.calibrations:
                rows.append(row_label(paradigm, cal))
                line = []
                for W in args.windows:
                    cfg = replace(_experiment_config(args, W), paradigm=paradigm)
                    result = run_experiment(stacks[cal], truth, cfg, n_threads=args.threads)
                    line.append(result.rmse)
                    print(f"{kind} {rows[-1]} W={W} rmse={result.rmse:.4f}", flush=True)
                    if W == largest:
                        _evaluation_files(
                            report_dir / f"{kind.lower()}_{paradigm}_{cal.lower()}_w{W}",
                            result.prediction.values.astype(np.float64),
                            result.reference.values.astype(np.float64), kind, result.timing,
                            title=f"{kind} {rows[-1]} {W}x{W}")
                values.append(line)
        table = SweepTable(list(args.windows), rows, np.array(values))
        table.write(report_dir / f"table_{kind.lower()}.csv")
    print(f"report={report_dir}")


COMMANDS = {
    "simulate": cmd_simulate, "features": cmd_features, "train": cmd_train,
    "predict": cmd_predict, "evaluate": cmd_evaluate, "report": cmd_report,
}


def main(argv=None) -> int:
    from .sardata import FormatError
    # numba probes TBB before falling back to another threading layer
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    try:
        args = parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise CliError("--threads must be at least 1")
        if args.threads is not None:
            import numba
            if args.threads > numba.config.NUMBA_NUM_THREADS:
                raise CliError(f"--threads {args.threads} exceeds the {numba.config.NUMBA_NUM_THREADS} "
                               "available (set NUMBA_NUM_THREADS)")
            numba.set_num_threads(args.threads)
        COMMANDS[args.command](args)
    except CliError as exc:
        print(f"canopyboost: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FormatError, KeyError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"canopyboost: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
