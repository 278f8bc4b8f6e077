"""Command-line surface: synth, clean, features, train, predict, evaluate.

Every command accepts --config pointing at a flat key-value file whose keys
are namespaced by command (for example ``train.model = svr``); explicit
flags override config values. The fully resolved configuration is echoed
into each artifact's provenance so a run can be reproduced from its output.
"""

from __future__ import annotations

import argparse
import ast
import logging
import sys
from pathlib import Path

import numpy as np

from . import store
from .bundle import CLASSIFICATION, REGRESSION, fit_bundle, make_estimator
from .cleaning import CleanerConfig, clean_sequence, cleaning_report_rows
from .errors import GaitPipeError, NoInitFrameError
from .evaluation import (
    classification_metrics,
    grid_search,
    make_split,
    regression_metrics,
)
from .models import Dataset, PrincipalComponents, cluster_gmfcs
from .pose import JOINT_L_ANKLE, JOINT_R_ANKLE, frame_filename, frame_to_json, load_sequence
from .signals import signal_dump_csv
from .spectral import SpectralConfig, ankle_signal, feature_matrix, video_features
from .synth import DatasetRanges, default_scene, generate_dataset, generate_scene

log = logging.getLogger(__name__)


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(","))


def _parse_pair(text: str) -> tuple[float, float]:
    values = _parse_floats(text)
    if len(values) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got {text!r}")
    return values  # type: ignore[return-value]


def _parse_grid(text: str) -> dict[str, list[float]]:
    grid: dict[str, list[float]] = {}
    for chunk in text.split(";"):
        name, _, values = chunk.partition("=")
        if not values:
            raise argparse.ArgumentTypeError(f"bad grid chunk {chunk!r}")
        grid[name.strip()] = [float(v) for v in values.split(",")]
    return grid


def _parse_split(text: str):
    kind, _, rest = text.partition(":")
    if kind == "kfold":
        return {"kind": "kfold", "k": int(rest or 5)}
    if kind == "buckets":
        return {"kind": "buckets"}
    if kind == "holdout":
        fractions = _parse_floats(rest) if rest else (0.7, 0.15, 0.15)
        if len(fractions) != 3:
            raise argparse.ArgumentTypeError("holdout needs train,val,test fractions")
        return {"kind": "holdout", "fractions": fractions}
    raise argparse.ArgumentTypeError(f"unknown split plan {text!r}")


def _parse_params(items: list[str]) -> dict:
    out = {}
    for item in items or []:
        name, _, value = item.partition("=")
        if not value:
            raise argparse.ArgumentTypeError(f"expected name=value, got {item!r}")
        try:
            out[name.strip()] = ast.literal_eval(value.strip())
        except (ValueError, SyntaxError):
            out[name.strip()] = value.strip()
    return out


# converters applied to config-file strings, per argument dest
_CONFIG_TYPES = {
    "fps": float, "width": int, "height": int, "gate": float, "cmin": float,
    "seed": int, "frames": int, "n": int, "duration": float,
    "edges": _parse_floats, "cadence": _parse_pair, "step_length": _parse_pair,
    "noise": _parse_pair, "grid": _parse_grid, "split": _parse_split,
    "pca": int, "ridge": float, "extras": lambda s: s.lower() in ("1", "true", "yes"),
}


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    config: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise GaitPipeError(f"{path}:{line_no}: expected 'command.key = value'")
        key, _, value = line.partition("=")
        config[key.strip()] = value.strip()
    return config


def _provenance(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "command"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        out[key] = value if isinstance(value, (str, int, float, bool)) else repr(value)
    return out


# --- commands ----------------------------------------------------------------

def cmd_synth(args) -> int:
    if args.what == "scene":
        scene = default_scene(seed=args.seed, n_frames=args.frames)
        seq, labels = generate_scene(scene)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for frame in seq.frames:
            (out / frame_filename("scene", frame.index)).write_text(frame_to_json(frame))
        label_lines = ["frame,labels"]
        label_lines += [f"{i},{'|'.join(labels[i])}" for i in sorted(labels)]
        (out / "labels.csv").write_text("\n".join(label_lines) + "\n")
        print(f"wrote {len(seq.frames)} frames to {out}")
        return 0
    # dataset
    cfg = SpectralConfig(band_edges=args.edges) if args.edges else SpectralConfig()
    ranges = DatasetRanges(
        cadence=args.cadence, step_length=args.step_length,
        noise_sigma=args.noise, duration_s=args.duration, fps=args.fps,
    )
    rows = generate_dataset(args.n, ranges=ranges, seed=args.seed, cfg=cfg)
    store.write_features(args.out, rows, provenance=_provenance(args))
    print(f"wrote {len(rows)} samples to {args.out}")
    return 0


def cmd_clean(args) -> int:
    seq = load_sequence(args.in_dir, fps=args.fps, dims=(args.width, args.height))
    cfg = CleanerConfig(gate_fraction=args.gate, cog_conf_min=args.cmin)
    pair = clean_sequence(seq, cfg)
    store.write_tracks(args.out, pair, fps=seq.fps,
                       dims=(seq.image_width, seq.image_height),
                       provenance=_provenance(args))
    if args.report:
        rows = cleaning_report_rows(pair, seq)
        lines = ["frame,entries,left_assigned,right_assigned,rejected"]
        lines += [
            f"{r['frame']},{r['entries']},{r['left_assigned']},{r['right_assigned']},{r['rejected']}"
            for r in rows
        ]
        store.atomic_write_text(args.report, "\n".join(lines) + "\n")
    print(
        f"cleaned {len(seq.frames)} frames; lock-on at frame {pair.init_frame}, "
        f"{pair.total_rejected} entries rejected"
    )
    return 0


def cmd_features(args) -> int:
    cfg = SpectralConfig(
        band_edges=args.edges or SpectralConfig().band_edges,
        window=args.window,
        ankle_axis=args.axis,
        include_extras=args.extras,
    )
    rows = []
    for tracks_path in args.tracks:
        pair, fps, _ = store.read_tracks(tracks_path)
        stem = Path(tracks_path).stem
        rows.append(video_features(pair, fps=fps, cfg=cfg, sample_id=stem))
        if args.dump_signals:
            dump_dir = Path(args.dump_signals)
            dump_dir.mkdir(parents=True, exist_ok=True)
            for label, joint in (("rank", JOINT_R_ANKLE), ("lank", JOINT_L_ANKLE)):
                sig = ankle_signal(pair.right, joint, fps, cfg)
                store.atomic_write_text(dump_dir / f"{stem}_{label}.csv", signal_dump_csv(sig))
    store.write_features(args.out, rows, provenance=_provenance(args))
    print(f"wrote {len(rows)} feature rows to {args.out}")
    return 0


def _load_xy(features_path: str, target: str):
    rows = store.read_features(features_path)
    if not rows:
        raise GaitPipeError(f"{features_path} holds no samples")
    X, y, names = feature_matrix(rows, target)
    task = CLASSIFICATION if target == "gmfcs" else REGRESSION
    if task == CLASSIFICATION:
        y = np.array([cluster_gmfcs(int(level)) for level in y])
    return rows, X, y, names, task


def cmd_train(args) -> int:
    _, X, y, names, task = _load_xy(args.features, args.target)
    plan = make_split(len(y), seed=args.seed, **args.split)
    params = _parse_params(args.param)
    provenance = _provenance(args)

    if args.grid:
        # select hyperparameters in the same standardized space the bundle fits in
        ds = Dataset.standardize(X, y.astype(float), names)
        if task == REGRESSION:
            y_fit = (ds.y - ds.y.mean()) / (ds.y.std() or 1.0)
        else:
            y_fit = y
        Z = ds.X
        if args.pca:
            Z = PrincipalComponents(n_components=args.pca).fit(Z).transform(Z)
        base = make_estimator(args.model, task, **params)
        result = grid_search(Z, y_fit, base, args.grid, plan, task)
        params.update(result.best_params)
        provenance["grid_best"] = repr(result.best_params)
        provenance["grid_best_score"] = store.fmt_float(result.best_score)
        if args.grid_table:
            store.write_grid_table(args.grid_table, result.table)
        log.info("grid search best %s (score %.4g)", result.best_params, result.best_score)

    estimator = make_estimator(args.model, task, **params)
    bundle = fit_bundle(
        X, y, names,
        kind=args.model, target=args.target,
        estimator=estimator,
        pca_components=args.pca or None,
        provenance=provenance,
    )
    store.write_model(args.out, bundle)
    print(f"trained {args.model} for {args.target}; model written to {args.out}")
    return 0


def _aligned_matrix(bundle, features_path: str):
    rows = store.read_features(features_path)
    if not rows:
        raise GaitPipeError(f"{features_path} holds no samples")
    X, _, names = feature_matrix(rows)
    if names != bundle.feature_names:
        for i, (got, want) in enumerate(zip(names, bundle.feature_names)):
            if got != want:
                raise GaitPipeError(
                    f"feature name mismatch at column {i}: file has {got!r}, model expects {want!r}"
                )
        raise GaitPipeError(
            f"feature count mismatch: file has {len(names)}, model expects {len(bundle.feature_names)}"
        )
    return rows, X


def cmd_predict(args) -> int:
    bundle = store.read_model(args.model)
    rows, X = _aligned_matrix(bundle, args.features)
    pred = bundle.predict(X)
    lines = [f"id,{bundle.target}_pred"]
    lines += [f"{r.id},{store.fmt_float(p)}" for r, p in zip(rows, pred)]
    store.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {len(rows)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    bundle = store.read_model(args.model)
    rows, X = _aligned_matrix(bundle, args.features)
    if any(bundle.target not in r.targets for r in rows):
        raise GaitPipeError(f"feature file lacks the {bundle.target!r} target column")
    y_true = np.array([r.targets[bundle.target] for r in rows])
    pred = bundle.predict(X)
    if bundle.task == REGRESSION:
        report = regression_metrics(y_true, pred)
    else:
        y_true = np.array([cluster_gmfcs(int(v)) for v in y_true])
        report = classification_metrics(y_true, pred, scores=bundle.decision_scores(X))
    report.provenance.update(_provenance(args))
    report.provenance["model_kind"] = bundle.kind
    store.write_report(args.out, report)
    for line in report.summary_lines():
        print(line)
    return 0


# --- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitpipe",
        description="Clean pose-keypoint streams, extract gait band-power features, "
                    "and train/evaluate gait-parameter models.",
    )
    parser.add_argument("--config", help="flat key-value config file (keys like train.model)")
    parser.add_argument("-v", "--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic scenes or feature datasets")
    p.add_argument("what", choices=("scene", "dataset"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=600, help="scene length in frames")
    p.add_argument("--n", type=int, default=200, help="dataset sample count")
    p.add_argument("--cadence", type=_parse_pair, default=(78.0, 150.0))
    p.add_argument("--step-length", dest="step_length", type=_parse_pair, default=(0.45, 0.95))
    p.add_argument("--noise", type=_parse_pair, default=(0.5, 2.0))
    p.add_argument("--duration", type=float, default=16.0)
    p.add_argument("--fps", type=float, default=32.0)
    p.add_argument("--edges", type=_parse_floats, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("clean", help="assign pose entries to the two view tracks")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="optional per-frame audit CSV")
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.add_argument("--gate", type=float, default=CleanerConfig.gate_fraction)
    p.add_argument("--cmin", type=float, default=CleanerConfig.cog_conf_min)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("features", help="band-power features from cleaned tracks")
    p.add_argument("tracks", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--edges", type=_parse_floats, default=None)
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument("--window", choices=("rect", "hann"), default="rect")
    p.add_argument("--extras", action="store_true")
    p.add_argument("--dump-signals", dest="dump_signals",
                   help="directory for per-channel frame/value/interpolated CSVs")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit a model on a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--target", required=True, choices=("cadence", "step_length", "speed", "gmfcs"))
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--pca", type=int, default=0, help="project to this many components first")
    p.add_argument("--split", type=_parse_split, default={"kind": "kfold", "k": 5})
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="hyperparameter grid, e.g. 'C=0.1,1,10;gamma=0.1,1,10'")
    p.add_argument("--grid-table", dest="grid_table", help="write the full grid CSV here")
    p.add_argument("--param", action="append", default=[],
                   help="estimator parameter override, name=value (repeatable)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to a feature table")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a saved model against labeled features")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Fold config-file values in as subparser defaults before parsing."""
    config_path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif arg.startswith("--config="):
            config_path = arg.partition("=")[2]
    if config_path is None:
        return argv
    config = _load_config(config_path)
    if not config:
        return argv
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    for action in sub_actions:
        for name, sub in action.choices.items():
            defaults = {}
            for key, value in config.items():
                cmd, _, dest = key.partition(".")
                if cmd != name:
                    continue
                dest = dest.replace("-", "_")
                convert = _CONFIG_TYPES.get(dest)
                defaults[dest] = convert(value) if convert else value
            if defaults:
                sub.set_defaults(**defaults)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return args.func(args)
    except NoInitFrameError as exc:
        print(f"error: NoInitFrame: {exc}", file=sys.stderr)
        return 2
    except GaitPipeError as exc:
        print(f"error: {type(exc).__name__.removesuffix('Error')}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: Io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
