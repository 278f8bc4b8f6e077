"""A fitted pipeline: feature standardization, optional projection, predictor.

This is the unit the CLI trains, the store persists, and `predict` applies.
Estimators themselves stay raw (they see standardized inputs); the bundle
owns every statistic needed to reproduce predictions from raw feature rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GaitPipeError
from .models import Dataset, PrincipalComponents, check_matrix, estimator_class

REGRESSION = "regression"
CLASSIFICATION = "classification"


def make_estimator(kind: str, task: str, **params):
    return estimator_class(kind, task)(**params)


@dataclass
class ModelBundle:
    kind: str
    task: str
    target: str
    estimator: object
    feature_names: tuple[str, ...]  # raw input columns, in training order
    x_mean: np.ndarray              # statistics over the kept columns
    x_std: np.ndarray
    kept: np.ndarray                # indices of retained (non-constant) columns
    y_mean: float = 0.0
    y_std: float = 1.0
    pca: PrincipalComponents | None = None
    provenance: dict = field(default_factory=dict)

    def _project(self, X_raw: np.ndarray) -> np.ndarray:
        X = check_matrix(X_raw)
        if X.shape[1] != len(self.feature_names):
            raise GaitPipeError(
                f"expected {len(self.feature_names)} feature columns, got {X.shape[1]}"
            )
        Z = (X[:, self.kept] - self.x_mean) / self.x_std
        if self.pca is not None:
            Z = self.pca.transform(Z)
        return Z

    def predict(self, X_raw) -> np.ndarray:
        pred = self.estimator.predict(self._project(X_raw))
        if self.task == REGRESSION:
            return pred * self.y_std + self.y_mean
        return pred

    def decision_scores(self, X_raw) -> np.ndarray | None:
        if hasattr(self.estimator, "decision_scores"):
            return self.estimator.decision_scores(self._project(X_raw))
        return None


def fit_bundle(
    X_raw,
    y,
    feature_names: tuple[str, ...],
    kind: str,
    target: str,
    estimator=None,
    pca_components: int | float | None = None,
    provenance: dict | None = None,
) -> ModelBundle:
    """Standardize, optionally project, and fit one predictor end to end."""
    task = CLASSIFICATION if kind == "rusboost" or target == "gmfcs" else REGRESSION
    if estimator is None:
        estimator = make_estimator(kind, task)
    y = np.asarray(y)
    if task == REGRESSION:
        y = y.astype(float)
        ds = Dataset.standardize(X_raw, y, feature_names)
        y_mean = float(ds.y.mean())
        y_std = float(ds.y.std()) or 1.0
        y_fit = (ds.y - y_mean) / y_std
    else:
        ds = Dataset.standardize(X_raw, np.zeros(len(y)), feature_names)
        y_mean, y_std = 0.0, 1.0
        y_fit = y
    Z = ds.X
    pca = None
    if pca_components is not None:
        pca = PrincipalComponents(n_components=pca_components).fit(Z)
        Z = pca.transform(Z)
    estimator.fit(Z, y_fit)
    names = tuple(feature_names) if feature_names else tuple(
        f"f{i}" for i in range(np.asarray(X_raw).shape[1])
    )
    return ModelBundle(
        kind=kind,
        task=task,
        target=target,
        estimator=estimator,
        feature_names=names,
        x_mean=ds.x_mean,
        x_std=ds.x_std,
        kept=ds.kept,
        y_mean=y_mean,
        y_std=y_std,
        pca=pca,
        provenance=dict(provenance or {}),
    )
