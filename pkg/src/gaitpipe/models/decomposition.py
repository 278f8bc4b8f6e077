"""Principal component analysis via eigendecomposition of the covariance."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .base import check_matrix


class PrincipalComponents(TransformerMixin, BaseEstimator):
    """Project features onto the top eigenvectors of the sample covariance.

    `n_components` may be an integer count or a fraction in (0, 1), in which
    case the smallest component count reaching that fraction of the total
    variance is kept. Component signs are fixed deterministically (largest
    coefficient positive).
    """

    def __init__(self, n_components: int | float = 6):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_matrix(X)
        n, d = X.shape
        if n < 2:
            raise ValueError("need at least 2 samples for a covariance")
        self.mean_ = X.mean(axis=0)
        cov = np.cov(X - self.mean_, rowvar=False, ddof=1).reshape(d, d)
        eigval, eigvec = np.linalg.eigh(cov)
        order = np.argsort(eigval)[::-1]
        eigval = np.clip(eigval[order], 0.0, None)
        components = eigvec[:, order].T

        if isinstance(self.n_components, float) and 0 < self.n_components < 1:
            ratio = np.cumsum(eigval) / eigval.sum()
            k = int(np.searchsorted(ratio, self.n_components) + 1)
        else:
            k = int(self.n_components)
            if not 1 <= k <= d:
                raise ValueError(f"n_components must be in 1..{d}, got {k}")
        components = components[:k]
        # deterministic sign: largest-magnitude coefficient is positive
        for row in components:
            pivot = np.argmax(np.abs(row))
            if row[pivot] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ = eigval[:k]
        self.n_features_in_ = d
        return self

    def transform(self, X):
        if not hasattr(self, "components_"):
            raise NotFittedError("fit the transform before applying it")
        X = check_matrix(X)
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, Z):
        Z = check_matrix(Z)
        return Z @ self.components_ + self.mean_
