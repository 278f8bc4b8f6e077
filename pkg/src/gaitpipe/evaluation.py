"""Splits, cross-validation, grid search, and reported metrics."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .errors import GaitPipeError, LengthMismatchError, TooFewSamplesError

log = logging.getLogger(__name__)

REGRESSION = "regression"
CLASSIFICATION = "classification"


@dataclass(frozen=True)
class SplitPlan:
    """Deterministic sample partition: seeded shuffle, then contiguous slices.

    kind "kfold"/"buckets": assignment holds the fold id per sample.
    kind "holdout": assignment holds 0 = train, 1 = validation, 2 = test.
    """

    kind: str
    seed: int
    assignment: np.ndarray
    n_folds: int = 0
    fractions: tuple[float, float, float] | None = None

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)


def make_split(
    n: int,
    kind: str = "kfold",
    seed: int = 0,
    k: int = 5,
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15),
) -> SplitPlan:
    """Build a split plan over n samples.

    kfold/buckets partition into k folds whose sizes differ by at most one;
    holdout cuts train/validation/test by the given fractions.
    """
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=int)
    if kind in ("kfold", "buckets"):
        if kind == "buckets":
            k = 4
        if n < k:
            raise TooFewSamplesError(f"{kind} with k={k} needs at least {k} samples, got {n}")
        for fold, idx in enumerate(np.array_split(perm, k)):
            assignment[idx] = fold
        return SplitPlan(kind=kind, seed=seed, assignment=assignment, n_folds=k)
    if kind == "holdout":
        if n < 3:
            raise TooFewSamplesError(f"holdout needs at least 3 samples, got {n}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"holdout fractions must sum to 1, got {fractions}")
        n_train = int(np.floor(n * fractions[0]))
        n_val = int(np.floor(n * fractions[1]))
        n_train, n_val = max(n_train, 1), max(n_val, 1)
        if n_train + n_val >= n:
            raise TooFewSamplesError(f"holdout fractions leave no test samples for n={n}")
        assignment[perm[:n_train]] = 0
        assignment[perm[n_train : n_train + n_val]] = 1
        assignment[perm[n_train + n_val :]] = 2
        return SplitPlan(kind=kind, seed=seed, assignment=assignment, fractions=fractions)
    raise ValueError(f"unknown split kind {kind!r}")


@dataclass
class EvalReport:
    """Everything one evaluation run reports, with its provenance."""

    task: str
    mse: float | None = None
    rmse: float | None = None
    mae: float | None = None
    r2: float | None = None
    r2_defined: bool = True
    accuracy: float | None = None
    auc: float | None = None
    auc_defined: bool = True
    confusion: np.ndarray | None = None
    classes: tuple | None = None
    per_fold: list[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def summary_lines(self) -> list[str]:
        lines = [f"task: {self.task}"]
        if self.task == REGRESSION:
            lines += [
                f"mse: {self.mse:.6g}",
                f"rmse: {self.rmse:.6g}",
                f"mae: {self.mae:.6g}",
                f"r2: {self.r2:.6g}" if self.r2_defined else "r2: undefined (constant target)",
            ]
        else:
            lines.append(f"accuracy: {self.accuracy:.6g}")
            lines.append(
                f"auc: {self.auc:.6g}" if self.auc_defined else "auc: undefined (single class)"
            )
            if self.confusion is not None:
                lines.append(f"classes: {list(self.classes)}")
                for true_i, row in enumerate(self.confusion):
                    lines.append(f"confusion[{true_i}]: {' '.join(str(int(v)) for v in row)}")
                # per-class recall replaces the ill-defined single percentage
                for true_i, row in enumerate(self.confusion):
                    total = row.sum()
                    recall = row[true_i] / total if total else float("nan")
                    lines.append(f"recall[{true_i}]: {recall:.6g}")
        for fold_row in self.per_fold:
            pairs = " ".join(f"{k}={v:.6g}" for k, v in fold_row.items() if isinstance(v, float))
            lines.append(f"fold {fold_row.get('fold', '?')}: {pairs}")
        for key in sorted(self.provenance):
            lines.append(f"provenance.{key}: {self.provenance[key]}")
        return lines


def regression_metrics(y_true, y_pred) -> EvalReport:
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.size == 0 or y_true.size != y_pred.size:
        raise LengthMismatchError(
            f"y_true has {y_true.size} values, y_pred has {y_pred.size}"
        )
    resid = y_pred - y_true
    mse = float(np.mean(resid**2))
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    r2_defined = ss_tot > 0
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if r2_defined else float("nan")
    return EvalReport(
        task=REGRESSION,
        mse=mse,
        rmse=float(np.sqrt(mse)),
        mae=float(np.mean(np.abs(resid))),
        r2=r2,
        r2_defined=r2_defined,
    )


def _ranks_with_ties(values: np.ndarray) -> np.ndarray:
    """1-based ranks, tied values sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=float)
    sorted_v = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auc_binary(y_true: np.ndarray, scores: np.ndarray) -> float:
    """Rank-statistic AUC; tied scores earn half credit."""
    pos = y_true.astype(bool)
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes present")
    ranks = _ranks_with_ties(np.asarray(scores, dtype=float))
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def classification_metrics(y_true, y_pred, scores=None, classes=None) -> EvalReport:
    """Accuracy, confusion matrix (rows = true class), and AUC.

    AUC needs `scores`: a 1-D positive-class score for two classes, or an
    (n, k) per-class score matrix averaged one-vs-rest for more.
    """
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if y_true.size == 0 or y_true.size != y_pred.size:
        raise LengthMismatchError(
            f"y_true has {y_true.size} values, y_pred has {y_pred.size}"
        )
    if classes is None:
        classes = np.unique(np.concatenate([y_true, y_pred]))
    else:
        classes = np.asarray(classes)
    index = {c: i for i, c in enumerate(classes.tolist())}
    confusion = np.zeros((classes.size, classes.size), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[index[t], index[p]] += 1
    accuracy = float(np.mean(y_true == y_pred))

    auc = None
    auc_defined = False
    if scores is not None and np.unique(y_true).size >= 2:
        scores = np.asarray(scores, dtype=float)
        if scores.ndim == 1:
            positive = classes[-1]
            auc = auc_binary(y_true == positive, scores)
        else:
            per_class = []
            for i, c in enumerate(classes.tolist()):
                mask = y_true == c
                if mask.any() and not mask.all():
                    per_class.append(auc_binary(mask, scores[:, i]))
            auc = float(np.mean(per_class)) if per_class else None
        auc_defined = auc is not None
    return EvalReport(
        task=CLASSIFICATION,
        accuracy=accuracy,
        auc=auc,
        auc_defined=auc_defined,
        confusion=confusion,
        classes=tuple(classes.tolist()),
    )


def _fit_predict(estimator, X, y, train, test, task):
    model = clone(estimator).fit(X[train], y[train])
    pred = model.predict(X[test])
    if task == REGRESSION:
        return regression_metrics(y[test], pred)
    scores = model.decision_scores(X[test]) if hasattr(model, "decision_scores") else None
    # fix the class set globally so per-fold confusions share a shape; drop
    # scores whose columns cannot be aligned (a class absent from the fold)
    classes = np.unique(y)
    if scores is not None and scores.ndim == 2 and scores.shape[1] != classes.size:
        scores = None
    return classification_metrics(y[test], pred, scores=scores, classes=classes)


def cross_validate(X, y, estimator, plan: SplitPlan, task: str = REGRESSION) -> EvalReport:
    """Rotate folds (or apply the holdout) and average the test metrics."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if plan.kind == "holdout":
        train = plan.fold_indices(0)
        val, test = plan.fold_indices(1), plan.fold_indices(2)
        report = _fit_predict(estimator, X, y, np.concatenate([train, val]), test, task)
        val_report = _fit_predict(estimator, X, y, train, val, task)
        key = "r2" if task == REGRESSION else "accuracy"
        report.per_fold.append({"fold": 0, f"val_{key}": getattr(val_report, key)})
        report.provenance["split"] = "holdout"
        return report

    fold_reports = []
    for fold in range(plan.n_folds):
        test = plan.fold_indices(fold)
        train = np.flatnonzero(plan.assignment != fold)
        fold_reports.append((fold, _fit_predict(estimator, X, y, train, test, task)))

    merged = EvalReport(task=task, provenance={"split": f"{plan.kind}:{plan.n_folds}"})
    if task == REGRESSION:
        for name in ("mse", "mae"):
            setattr(merged, name, float(np.mean([getattr(r, name) for _, r in fold_reports])))
        merged.rmse = float(np.sqrt(merged.mse))
        # average R^2 over the folds where it exists (a fold with constant
        # targets has none); undefined only if no fold defines it
        defined = [r.r2 for _, r in fold_reports if r.r2_defined]
        merged.r2_defined = bool(defined)
        merged.r2 = float(np.mean(defined)) if defined else float("nan")
        merged.per_fold = [
            {"fold": f, "mse": r.mse, "r2": r.r2} for f, r in fold_reports
        ]
    else:
        merged.accuracy = float(np.mean([r.accuracy for _, r in fold_reports]))
        aucs = [r.auc for _, r in fold_reports if r.auc_defined]
        merged.auc = float(np.mean(aucs)) if aucs else None
        merged.auc_defined = bool(aucs)
        merged.confusion = np.sum([r.confusion for _, r in fold_reports], axis=0)
        merged.classes = fold_reports[0][1].classes
        merged.per_fold = [{"fold": f, "accuracy": r.accuracy} for f, r in fold_reports]
    return merged


@dataclass
class GridSearchResult:
    best_params: dict
    best_score: float
    table: list[dict]
    best_report: EvalReport


def grid_search(
    X, y, estimator, grid: dict[str, list], plan: SplitPlan, task: str = REGRESSION
) -> GridSearchResult:
    """Evaluate every grid cell under the plan; best mean validation score wins.

    The score is R^2 for regression and accuracy for classification. Cells are
    visited in the given order and only a strictly better score displaces the
    incumbent, so listing values in ascending order breaks ties toward the
    smaller values. Failing cells are recorded and skipped.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must have at least one value per parameter")
    names = list(grid)
    key = "r2" if task == REGRESSION else "accuracy"
    table: list[dict] = []
    best: tuple[float, dict, EvalReport] | None = None
    for combo in itertools.product(*(grid[name] for name in names)):
        params = dict(zip(names, combo))
        cell = dict(params)
        try:
            report = cross_validate(X, y, clone(estimator).set_params(**params), plan, task)
            score = getattr(report, key)
            cell[key] = score
            cell["failed"] = ""
            if np.isfinite(score) and (best is None or score > best[0]):
                best = (score, params, report)
        except (GaitPipeError, ValueError, np.linalg.LinAlgError) as exc:
            log.warning("grid cell %s failed: %s", params, exc)
            cell[key] = float("nan")
            cell["failed"] = f"{type(exc).__name__}: {exc}"
        table.append(cell)
    if best is None:
        raise GaitPipeError("every grid cell failed")
    return GridSearchResult(
        best_params=best[1], best_score=best[0], table=table, best_report=best[2]
    )
