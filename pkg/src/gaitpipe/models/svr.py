"""Epsilon-tube support vector regression solved by pairwise coordinate steps.

The dual is kept in the doubled form over (alpha, alpha*): 2n box-constrained
variables coupled by one equality constraint. Each iteration picks the
maximal-violating pair, solves the two-variable subproblem in closed form,
and updates the gradient; the loop ends when the worst KKT violation falls
below `tol`.
"""

from __future__ import annotations

import logging

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .base import check_matrix, check_xy

log = logging.getLogger(__name__)

KERNELS = ("linear", "rbf", "poly")


def kernel_matrix(
    kind: str, A: np.ndarray, B: np.ndarray, gamma: float, degree: int, coef0: float
) -> np.ndarray:
    if kind == "linear":
        return A @ B.T
    if kind == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-gamma * np.clip(sq, 0.0, None))
    if kind == "poly":
        return (gamma * (A @ B.T) + coef0) ** degree
    raise ValueError(f"unknown kernel {kind!r}; expected one of {KERNELS}")


class SvrRegressor(RegressorMixin, BaseEstimator):
    """Support vector regression with linear, RBF, or polynomial kernel.

    Parameters
    ----------
    C : penalty for points outside the epsilon tube.
    epsilon : half-width of the zero-loss tube around the fit.
    gamma : kernel coefficient; "scale" maps to 1 / (n_features * var(X)).
    tol : maximal allowed KKT violation at convergence.
    max_iter : pair updates before giving up; the best iterate is kept and
        `converged_` is set False rather than raising.
    """

    def __init__(
        self,
        kernel: str = "rbf",
        C: float = 1.0,
        epsilon: float = 0.1,
        gamma: float | str = "scale",
        degree: int = 3,
        coef0: float = 0.0,
        tol: float = 1e-3,
        max_iter: int = 100_000,
    ):
        self.kernel = kernel
        self.C = C
        self.epsilon = epsilon
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_iter = max_iter

    def _gamma_value(self, X: np.ndarray) -> float:
        if self.gamma == "scale":
            var = X.var()
            return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        g = float(self.gamma)
        if g <= 0:
            raise ValueError("gamma must be positive")
        return g

    def fit(self, X, y):
        X, y = check_xy(X, y)
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        n = X.shape[0]
        C, eps = float(self.C), float(self.epsilon)
        gamma = self._gamma_value(X)

        K = kernel_matrix(self.kernel, X, X, gamma, self.degree, self.coef0)
        # doubled problem over a = [alpha; alpha*] with signs z = [+1; -1]:
        # minimize 1/2 a' Qbar a + p' a  s.t.  z'a = 0, 0 <= a <= C, where
        # Qbar[r, c] = z_r z_c K[r % n, c % n] -- so K itself is enough and
        # Qbar columns are synthesized on demand.
        p = np.concatenate([eps - y, eps + y])
        z = np.concatenate([np.ones(n), -np.ones(n)])

        def q_column(idx: int) -> np.ndarray:
            col = K[:, idx % n]
            return z[idx] * (z * np.concatenate([col, col]))

        a = np.zeros(2 * n)
        g = p.copy()  # gradient Qbar a + p at a = 0
        zg = z * g

        converged = False
        for _ in range(self.max_iter):
            up = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
            down = ((z < 0) & (a < C)) | ((z > 0) & (a > 0))
            neg_zg = -zg
            i = int(np.flatnonzero(up)[np.argmax(neg_zg[up])])
            j = int(np.flatnonzero(down)[np.argmin(neg_zg[down])])
            m, M = neg_zg[i], neg_zg[j]
            if m - M <= self.tol:
                converged = True
                break
            # step t moves a_i by +z_i t and a_j by -z_j t, preserving z'a;
            # the curvature reduces to K terms of the underlying points
            quad = K[i % n, i % n] + K[j % n, j % n] - 2.0 * K[i % n, j % n]
            t = (m - M) / max(quad, 1e-12)
            t = min(t, C - a[i] if z[i] > 0 else a[i])
            t = min(t, a[j] if z[j] > 0 else C - a[j])
            a[i] += z[i] * t
            a[j] -= z[j] * t
            delta = z[i] * t * q_column(i) - z[j] * t * q_column(j)
            g += delta
            zg += z * delta

        if not converged:
            log.warning(
                "SMO stopped after %d iterations with KKT gap %.3g > tol %.3g; "
                "keeping best iterate",
                self.max_iter, float(m - M), self.tol,
            )
        # dual coefficients beta = alpha - alpha*; bias from the KKT interval
        beta = a[:n] - a[n:]
        up = ((z > 0) & (a < C)) | ((z < 0) & (a > 0))
        down = ((z < 0) & (a < C)) | ((z > 0) & (a > 0))
        neg_zg = -zg
        hi = neg_zg[up].max() if up.any() else 0.0
        lo = neg_zg[down].min() if down.any() else 0.0
        bias = float((hi + lo) / 2.0)

        sv = np.flatnonzero(np.abs(beta) > 0)
        self.support_vectors_ = X[sv]
        self.dual_coef_ = beta[sv]
        self.intercept_ = bias
        self.gamma_ = gamma
        self.converged_ = converged
        self.kkt_gap_ = float(m - M)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "dual_coef_"):
            raise NotFittedError("fit the model before predicting")
        X = check_matrix(X)
        if self.support_vectors_.shape[0] == 0:
            return np.full(X.shape[0], self.intercept_)
        K = kernel_matrix(
            self.kernel, X, self.support_vectors_, self.gamma_, self.degree, self.coef0
        )
        return K @ self.dual_coef_ + self.intercept_
