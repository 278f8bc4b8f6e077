"""Least-squares linear models: ridge-regularized fit and forward selection."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import SingularSystemError
from .base import check_matrix, check_xy

# singular values below this fraction of the largest are treated as rank loss
_RANK_RTOL = 1e-10


def _solve_ridge(X: np.ndarray, y: np.ndarray, lam: float) -> tuple[np.ndarray, float]:
    """Minimize ||Xw + b - y||^2 + lam * ||w||^2 with an unpenalized intercept."""
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    if lam == 0.0 and (s.size == 0 or s[-1] <= _RANK_RTOL * s[0]):
        raise SingularSystemError(
            "design matrix is rank-deficient; add ridge regularization"
        )
    shrink = s / (s * s + lam)
    w = Vt.T @ (shrink * (U.T @ yc))
    b = y_mean - float(x_mean @ w)
    return w, b


class LinearRegressor(RegressorMixin, BaseEstimator):
    """Ordinary or ridge least squares fit via SVD.

    ridge_lambda = 0 gives the plain optimal linear predictor and raises on
    rank-deficient designs; any positive value regularizes the weights
    (never the intercept).
    """

    def __init__(self, ridge_lambda: float = 0.0):
        self.ridge_lambda = ridge_lambda

    def fit(self, X, y):
        X, y = check_xy(X, y)
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")
        self.weights_, self.intercept_ = _solve_ridge(X, y, self.ridge_lambda)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "weights_"):
            raise NotFittedError("fit the model before predicting")
        X = check_matrix(X)
        return X @ self.weights_ + self.intercept_


class StepwiseRegressor(RegressorMixin, BaseEstimator):
    """Forward feature selection wrapped around least squares.

    Greedily adds the feature whose inclusion most lowers cross-validated
    MSE, starting from the intercept-only model, and stops once the best
    relative improvement falls below `tol`. `selected_` records the order
    in which features entered.
    """

    def __init__(self, cv: int = 5, tol: float = 1e-3, ridge_lambda: float = 1e-8, seed: int = 0):
        self.cv = cv
        self.tol = tol
        self.ridge_lambda = ridge_lambda
        self.seed = seed

    def _cv_mse(self, X: np.ndarray, y: np.ndarray, folds: list[np.ndarray]) -> float:
        err = 0.0
        for test_idx in folds:
            mask = np.ones(y.size, dtype=bool)
            mask[test_idx] = False
            if X.shape[1] == 0:
                pred = np.full(test_idx.size, y[mask].mean())
            else:
                w, b = _solve_ridge(X[mask], y[mask], self.ridge_lambda)
                pred = X[test_idx] @ w + b
            err += float(np.sum((pred - y[test_idx]) ** 2))
        return err / y.size

    def fit(self, X, y):
        X, y = check_xy(X, y)
        n, d = X.shape
        rng = np.random.default_rng(self.seed)
        k = min(self.cv, n)
        folds = np.array_split(rng.permutation(n), k)

        selected: list[int] = []
        remaining = list(range(d))
        best_mse = self._cv_mse(X[:, []], y, folds)
        while remaining:
            scores = [
                (self._cv_mse(X[:, selected + [j]], y, folds), j) for j in remaining
            ]
            cand_mse, cand = min(scores)
            improvement = (best_mse - cand_mse) / best_mse if best_mse > 0 else 0.0
            if improvement < self.tol:
                break
            selected.append(cand)
            remaining.remove(cand)
            best_mse = cand_mse
        if not selected:
            # degenerate targets: fall back to the single best-scoring feature
            selected = [min((self._cv_mse(X[:, [j]], y, folds), j) for j in range(d))[1]]

        self.selected_ = tuple(selected)
        self.cv_mse_ = best_mse
        self.weights_, self.intercept_ = _solve_ridge(X[:, selected], y, self.ridge_lambda)
        self.n_features_in_ = d
        return self

    def predict(self, X):
        if not hasattr(self, "weights_"):
            raise NotFittedError("fit the model before predicting")
        X = check_matrix(X)
        return X[:, list(self.selected_)] @ self.weights_ + self.intercept_
