"""Artifact persistence: feature tables, cleaned tracks, models, reports.

Everything is text. Feature tables are CSV (optionally preceded by '#'
provenance comments); tracks and models use a line-oriented sectioned format
with a mandatory [end] marker so a truncated file can never read back as a
complete artifact. Floats are written with 17 significant digits, which
round-trips IEEE doubles exactly. Writes go to a temp file in the target
directory and are renamed into place, so readers never observe partial
artifacts.
"""

from __future__ import annotations

import ast
import csv
import io
from pathlib import Path

import numpy as np

from .bundle import ModelBundle
from .cleaning import CenterOfGravity, Track, TrackPair
from .errors import (
    BadArityError,
    BadHeaderError,
    NonFiniteValueError,
    VersionMismatchError,
)
from .evaluation import EvalReport
from .models import PrincipalComponents, make_estimator_state, restore_estimator
from .pose import JointPoint, Skeleton
from .spectral import TARGET_NAMES, FeatureVector
from .textio import (
    atomic_write_text,
    fmt_float,
    fmt_ivec,
    fmt_mat,
    fmt_vec,
    parse_ivec,
    parse_mat,
    parse_vec,
)

FORMAT_MAJOR = 1
FORMAT_MINOR = 0
_MAGIC = "gaitpipe-artifact"


# --- sectioned artifact format ----------------------------------------------

def _render_artifact(kind: str, header: dict[str, str], sections: list[tuple[str, dict[str, str]]]) -> str:
    out = io.StringIO()
    out.write(f"{_MAGIC}\n")
    out.write(f"format_version: {FORMAT_MAJOR}.{FORMAT_MINOR}\n")
    out.write(f"kind: {kind}\n")
    for key, value in header.items():
        out.write(f"{key}: {value}\n")
    for name, body in sections:
        out.write(f"[{name}]\n")
        for key, value in body.items():
            out.write(f"{key} = {value}\n")
    out.write("[end]\n")
    return out.getvalue()


def _parse_artifact(path: str | Path, expect_kind: str) -> tuple[dict[str, str], list[tuple[str, dict[str, str]]]]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != _MAGIC:
        raise BadHeaderError(f"{path}: not a gaitpipe artifact")
    header: dict[str, str] = {}
    sections: list[tuple[str, dict[str, str]]] = []
    current: dict[str, str] | None = None
    ended = False
    for raw in lines[1:]:
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if line == "[end]":
            ended = True
            break
        if line.startswith("[") and line.endswith("]"):
            current = {}
            sections.append((line[1:-1], current))
            continue
        if current is None:
            if ":" not in line:
                raise BadHeaderError(f"{path}: bad header line {line!r}")
            key, _, value = line.partition(":")
            header[key.strip()] = value.strip()
        else:
            if "=" not in line:
                raise BadHeaderError(f"{path}: bad section line {line!r}")
            key, _, value = line.partition("=")
            current[key.strip()] = value.strip()
    if not ended:
        raise VersionMismatchError(f"{path}: truncated artifact (missing [end])")
    version = header.get("format_version", "")
    major = version.split(".")[0]
    if not major.isdigit() or int(major) != FORMAT_MAJOR:
        raise VersionMismatchError(
            f"{path}: format version {version!r} not readable by this build (major {FORMAT_MAJOR})"
        )
    if header.get("kind") != expect_kind:
        raise BadHeaderError(f"{path}: artifact kind {header.get('kind')!r}, expected {expect_kind!r}")
    return header, sections


# --- feature tables (CSV) ---------------------------------------------------

def write_features(
    path: str | Path,
    rows: list[FeatureVector],
    feature_names: tuple[str, ...] | None = None,
    provenance: dict | None = None,
) -> None:
    if rows:
        feature_names = rows[0].names
        for r in rows:
            if r.names != feature_names:
                raise BadHeaderError(f"inconsistent feature names at id={r.id!r}")
    elif feature_names is None:
        raise BadHeaderError("empty table needs explicit feature_names")
    targets = [t for t in TARGET_NAMES if rows and t in rows[0].targets]
    for r in rows:
        if [t for t in TARGET_NAMES if t in r.targets] != targets:
            raise BadHeaderError(f"inconsistent target columns at id={r.id!r}")

    buf = io.StringIO()
    for key in sorted(provenance or {}):
        buf.write(f"# {key} = {provenance[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *feature_names, *targets])
    for r in rows:
        if not np.all(np.isfinite(r.values)):
            raise NonFiniteValueError(f"non-finite feature value at id={r.id!r}")
        writer.writerow(
            [r.id, *(fmt_float(v) for v in r.values), *(fmt_float(r.targets[t]) for t in targets)]
        )
    atomic_write_text(path, buf.getvalue())


def read_features(path: str | Path) -> list[FeatureVector]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    try:
        head = next(reader)
    except StopIteration:
        raise BadHeaderError(f"{path}: empty file") from None
    if not head or head[0] != "id":
        raise BadHeaderError(f"{path}: first column must be 'id', got {head[:1]}")
    target_start = len(head)
    for i, col in enumerate(head[1:], start=1):
        if col in TARGET_NAMES:
            target_start = i
            break
    names = tuple(head[1:target_start])
    targets = head[target_start:]
    unknown = [t for t in targets if t not in TARGET_NAMES]
    if unknown:
        raise BadHeaderError(f"{path}: unknown target columns {unknown}")

    rows = []
    for line_no, rec in enumerate(reader, start=2):
        if len(rec) != len(head):
            raise BadArityError(
                f"{path}: row {line_no} has {len(rec)} columns, header declares {len(head)}"
            )
        try:
            values = np.array([float(x) for x in rec[1 : 1 + len(names)]])
            tvals = {t: float(x) for t, x in zip(targets, rec[1 + len(names):])}
        except ValueError as exc:
            raise BadArityError(f"{path}: row {line_no}: {exc}") from exc
        if not np.all(np.isfinite(values)) or not all(np.isfinite(v) for v in tvals.values()):
            raise NonFiniteValueError(f"{path}: row {line_no} has a non-finite value")
        rows.append(FeatureVector(id=rec[0], names=names, values=values, targets=tvals))
    return rows


# --- cleaned tracks ----------------------------------------------------------

def _encode_track(track: Track) -> dict[str, str]:
    ordinals = sorted(track.samples)
    data = ";".join(
        ",".join(
            fmt_float(v)
            for pt in track.samples[o].joints
            for v in (pt.x, pt.y, pt.c)
        )
        for o in ordinals
    )
    body = {
        "label": track.label,
        "frames": fmt_ivec(ordinals),
        "data": data,
        "gaps": ";".join(f"{a},{b}" for a, b in track.gaps),
    }
    if track.last_cog is not None:
        body["last_cog"] = f"{fmt_float(track.last_cog.x)},{fmt_float(track.last_cog.y)},{track.last_cog.support}"
    return body


def _decode_track(body: dict[str, str]) -> Track:
    ordinals = parse_ivec(body["frames"])
    samples = {}
    rows = body["data"].split(";") if body["data"] else []
    if len(rows) != len(ordinals):
        raise BadArityError(f"track has {len(ordinals)} frames but {len(rows)} data rows")
    for o, row in zip(ordinals, rows):
        vals = [float(x) for x in row.split(",")]
        if len(vals) != 54:
            raise BadArityError(f"frame {o}: expected 54 values, got {len(vals)}")
        joints = tuple(JointPoint(vals[3 * j], vals[3 * j + 1], vals[3 * j + 2]) for j in range(18))
        samples[int(o)] = Skeleton(joints)
    gaps = []
    if body.get("gaps"):
        for chunk in body["gaps"].split(";"):
            a, b = chunk.split(",")
            gaps.append((int(a), int(b)))
    last_cog = None
    if "last_cog" in body:
        x, y, support = body["last_cog"].split(",")
        last_cog = CenterOfGravity(float(x), float(y), int(support))
    return Track(label=body["label"], samples=samples, last_cog=last_cog, gaps=gaps)


def write_tracks(
    path: str | Path,
    pair: TrackPair,
    fps: float,
    dims: tuple[int, int],
    provenance: dict | None = None,
) -> None:
    header = {
        "fps": fmt_float(fps),
        "image_width": str(dims[0]),
        "image_height": str(dims[1]),
    }
    pair_body = {
        "init_frame": str(pair.init_frame),
        "rejected": ";".join(f"{k},{v}" for k, v in sorted(pair.rejected.items())),
    }
    sections = [
        ("provenance", {k: str(v) for k, v in sorted((provenance or {}).items())}),
        ("pair", pair_body),
        ("left", _encode_track(pair.left)),
        ("right", _encode_track(pair.right)),
    ]
    atomic_write_text(path, _render_artifact("tracks", header, sections))


def read_tracks(path: str | Path) -> tuple[TrackPair, float, tuple[int, int]]:
    header, sections = _parse_artifact(path, "tracks")
    bodies = dict(sections)
    pair_body = bodies["pair"]
    rejected = {}
    if pair_body.get("rejected"):
        for chunk in pair_body["rejected"].split(";"):
            k, v = chunk.split(",")
            rejected[int(k)] = int(v)
    pair = TrackPair(
        left=_decode_track(bodies["left"]),
        right=_decode_track(bodies["right"]),
        init_frame=int(pair_body["init_frame"]),
        rejected=rejected,
    )
    fps = float(header["fps"])
    dims = (int(header["image_width"]), int(header["image_height"]))
    return pair, fps, dims


# --- models ------------------------------------------------------------------

def write_model(path: str | Path, bundle: ModelBundle) -> None:
    header = {
        "model_kind": bundle.kind,
        "task": bundle.task,
        "target": bundle.target,
    }
    bundle_body = {
        "feature_names": ",".join(bundle.feature_names),
        "kept": fmt_ivec(bundle.kept),
        "x_mean": fmt_vec(bundle.x_mean),
        "x_std": fmt_vec(bundle.x_std),
        "y_mean": fmt_float(bundle.y_mean),
        "y_std": fmt_float(bundle.y_std),
    }
    sections = [
        ("provenance", {k: str(v) for k, v in sorted(bundle.provenance.items())}),
        ("bundle", bundle_body),
    ]
    if bundle.pca is not None:
        sections.append(
            (
                "pca",
                {
                    "n_components": repr(bundle.pca.n_components),
                    "mean": fmt_vec(bundle.pca.mean_),
                    "components": fmt_mat(bundle.pca.components_),
                    "explained_variance": fmt_vec(bundle.pca.explained_variance_),
                },
            )
        )
    params, state = make_estimator_state(bundle.kind, bundle.task, bundle.estimator)
    sections.append(("params", params))
    sections.append(("state", state))
    atomic_write_text(path, _render_artifact("model", header, sections))


def read_model(path: str | Path) -> ModelBundle:
    header, sections = _parse_artifact(path, "model")
    bodies = dict(sections)
    kind = header.get("model_kind", "")
    task = header.get("task", "")
    b = bodies.get("bundle")
    if b is None:
        raise BadHeaderError(f"{path}: missing [bundle] section")
    pca = None
    if "pca" in bodies:
        p = bodies["pca"]
        pca = PrincipalComponents(n_components=ast.literal_eval(p["n_components"]))
        pca.mean_ = parse_vec(p["mean"])
        pca.components_ = parse_mat(p["components"])
        pca.explained_variance_ = parse_vec(p["explained_variance"])
        pca.n_features_in_ = pca.components_.shape[1]
    estimator = restore_estimator(kind, task, bodies.get("params", {}), bodies.get("state", {}))
    return ModelBundle(
        kind=kind,
        task=task,
        target=header.get("target", ""),
        estimator=estimator,
        feature_names=tuple(b["feature_names"].split(",")) if b["feature_names"] else (),
        x_mean=parse_vec(b["x_mean"]),
        x_std=parse_vec(b["x_std"]),
        kept=parse_ivec(b["kept"]),
        y_mean=float(b["y_mean"]),
        y_std=float(b["y_std"]),
        pca=pca,
        provenance=dict(bodies.get("provenance", {})),
    )


# --- evaluation reports ------------------------------------------------------

def report_kv_pairs(report: EvalReport) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = [("task", report.task)]
    scalars = (
        ("mse", report.mse), ("rmse", report.rmse), ("mae", report.mae),
        ("r2", report.r2 if report.r2_defined else None),
        ("accuracy", report.accuracy),
        ("auc", report.auc if report.auc_defined else None),
    )
    for key, value in scalars:
        if value is not None and np.isfinite(value):
            pairs.append((key, fmt_float(value)))
    if report.confusion is not None:
        pairs.append(("classes", ",".join(str(c) for c in report.classes)))
        pairs.append(("confusion", fmt_mat(np.asarray(report.confusion, dtype=float))))
    for row in report.per_fold:
        fold = row.get("fold", "?")
        for key, value in row.items():
            if key != "fold" and isinstance(value, float) and np.isfinite(value):
                pairs.append((f"fold{fold}.{key}", fmt_float(value)))
    for key in sorted(report.provenance):
        pairs.append((f"provenance.{key}", str(report.provenance[key])))
    return pairs


def write_report(path: str | Path, report: EvalReport) -> None:
    """Write <path> as readable text and <path>.kv as machine key-values."""
    text = "\n".join(report.summary_lines()) + "\n"
    atomic_write_text(path, text)
    kv = "".join(f"{k} = {v}\n" for k, v in report_kv_pairs(report))
    atomic_write_text(str(path) + ".kv", kv)


def write_csv_rows(
    path: str | Path,
    header: list[str],
    rows: list[list],
    provenance: dict | None = None,
) -> None:
    """Generic provenance-commented CSV (predictions, audit reports)."""
    buf = io.StringIO()
    for key in sorted(provenance or {}):
        buf.write(f"# {key} = {provenance[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


def write_grid_table(path: str | Path, table: list[dict], provenance: dict | None = None) -> None:
    if not table:
        return
    cols = list(table[0])
    rows = [
        [
            fmt_float(row[c]) if isinstance(row[c], float) and np.isfinite(row[c]) else row[c]
            for c in cols
        ]
        for row in table
    ]
    write_csv_rows(path, cols, rows, provenance)
