"""Shared model-layer plumbing: input validation, standardization, targets."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import BadLevelError

log = logging.getLogger(__name__)


def check_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = check_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")
    return X, y


@dataclass
class Dataset:
    """Standardized design matrix with the statistics needed to undo it.

    Zero-variance features are dropped (with a warning) rather than divided
    by zero; `kept` maps retained columns back to the original layout.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    x_mean: np.ndarray
    x_std: np.ndarray
    kept: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @classmethod
    def standardize(cls, X, y, feature_names: tuple[str, ...] | None = None) -> "Dataset":
        X, y = check_xy(X, y)
        names = tuple(feature_names) if feature_names else tuple(
            f"f{i}" for i in range(X.shape[1])
        )
        if len(names) != X.shape[1]:
            raise ValueError("feature_names length does not match X columns")
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        kept = np.flatnonzero(std > 0)
        if kept.size < X.shape[1]:
            dropped = [names[i] for i in range(X.shape[1]) if i not in set(kept.tolist())]
            log.warning("dropping %d zero-variance feature(s): %s", len(dropped), dropped)
        if kept.size == 0:
            raise ValueError("all features have zero variance")
        Xs = (X[:, kept] - mean[kept]) / std[kept]
        return cls(
            X=Xs,
            y=y,
            feature_names=tuple(names[i] for i in kept),
            x_mean=mean[kept],
            x_std=std[kept],
            kept=kept,
        )

    def transform(self, X) -> np.ndarray:
        """Apply the stored standardization to new raw rows."""
        X = check_matrix(X)
        return (X[:, self.kept] - self.x_mean) / self.x_std


def cluster_gmfcs(level: int) -> int:
    """Collapse the five motor-function levels into three decision classes.

    Level 1 stays its own class (no disorder); levels 2-3 become the
    low-disorder class; levels 4-5 the high-disorder (treatment) class.
    """
    if level not in (1, 2, 3, 4, 5):
        raise BadLevelError(f"motor-function level must be 1..5, got {level!r}")
    if level == 1:
        return 0
    if level in (2, 3):
        return 1
    return 2
