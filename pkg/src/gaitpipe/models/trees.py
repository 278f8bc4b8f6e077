"""Binary decision trees and the ensembles built from them.

The tree grower does an exhaustive scan over candidate thresholds (midpoints
of consecutive sorted unique values) minimizing weighted Gini impurity for
classification or weighted variance for regression. Forests bag trees over
bootstrap samples with per-split feature subsampling; the boosting ensemble
re-balances classes by random undersampling before every round.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import SingleClassError
from .base import check_matrix, check_xy

_EPS_ERROR = 1e-10  # floor on a boosting round's weighted error


# --- flat tree representation (easy to serialize, fast to evaluate) --------

class _TreeArrays:
    """Nodes as parallel arrays; leaves have feature == -1."""

    __slots__ = ("feature", "threshold", "left", "right", "value")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []

    def add(self, feature: int, threshold: float, value: np.ndarray) -> int:
        self.feature.append(feature)
        self.threshold.append(threshold)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(value)
        return len(self.feature) - 1

    def apply(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((X.shape[0], self.value[0].size))
        for r in range(X.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if X[r, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[r] = self.value[node]
        return out


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _grow(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    *,
    classification: bool,
    n_classes: int,
    max_depth: int | None,
    min_leaf: int,
    max_features: int | None,
    rng: np.random.Generator | None,
) -> _TreeArrays:
    tree = _TreeArrays()

    def leaf_value(idx: np.ndarray) -> np.ndarray:
        if classification:
            counts = np.bincount(y[idx].astype(int), weights=w[idx], minlength=n_classes)
            return counts / max(counts.sum(), 1e-300)
        return np.array([np.average(y[idx], weights=w[idx])])

    def impurity_after(col: np.ndarray, yv: np.ndarray, wv: np.ndarray):
        """Best (score, threshold) for one feature column, or None.

        Scores every legal cut between consecutive sorted values at once;
        the first minimum wins, which breaks ties toward the smaller
        threshold.
        """
        order = np.argsort(col, kind="mergesort")
        cs, ys, ws = col[order], yv[order], wv[order]
        n = cs.size
        cuts = np.arange(min_leaf, n - min_leaf + 1)
        cuts = cuts[cs[cuts - 1] < cs[cuts]]
        if cuts.size == 0:
            return None
        if classification:
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), ys.astype(int)] = 1.0
            cum = np.cumsum(onehot * ws[:, None], axis=0)
            left = cum[cuts - 1]
            right = cum[-1] - left
            wl, wr = left.sum(axis=1), right.sum(axis=1)
            # weighted Gini: w * (1 - sum p^2) = w - sum(counts^2) / w
            score = (
                wl - np.sum(left * left, axis=1) / np.maximum(wl, 1e-300)
                + wr - np.sum(right * right, axis=1) / np.maximum(wr, 1e-300)
            )
        else:
            cw = np.cumsum(ws)
            cwy = np.cumsum(ws * ys)
            cwy2 = np.cumsum(ws * ys * ys)
            wl, wr = cw[cuts - 1], cw[-1] - cw[cuts - 1]
            ok = (wl > 0) & (wr > 0)
            sl, sr = cwy[cuts - 1], cwy[-1] - cwy[cuts - 1]
            ql, qr = cwy2[cuts - 1], cwy2[-1] - cwy2[cuts - 1]
            score = np.where(
                ok,
                (ql - sl * sl / np.maximum(wl, 1e-300))
                + (qr - sr * sr / np.maximum(wr, 1e-300)),
                np.inf,
            )
            if not ok.any():
                return None
        k = int(np.argmin(score))
        cut = cuts[k]
        return float(score[k]), float((cs[cut - 1] + cs[cut]) / 2.0)

    def node_impurity(idx: np.ndarray) -> float:
        if classification:
            counts = np.bincount(y[idx].astype(int), weights=w[idx], minlength=n_classes)
            return counts.sum() * _gini(counts)
        wv, yv = w[idx], y[idx]
        mean = np.average(yv, weights=wv)
        return float(np.sum(wv * (yv - mean) ** 2))

    def build(idx: np.ndarray, depth: int) -> int:
        node = tree.add(-1, 0.0, leaf_value(idx))
        if max_depth is not None and depth >= max_depth:
            return node
        if idx.size < 2 * min_leaf:
            return node
        if classification and np.unique(y[idx]).size == 1:
            return node
        parent = node_impurity(idx)
        if parent <= 1e-15:
            return node

        d = X.shape[1]
        if max_features is not None and max_features < d:
            features = np.sort(rng.choice(d, size=max_features, replace=False))
        else:
            features = np.arange(d)
        best = None
        for f in features:
            found = impurity_after(X[idx, f], y[idx], w[idx])
            if found is None:
                continue
            score, thr = found
            # strict improvement; ties keep the earlier (smaller) feature/threshold
            if best is None or score < best[0] - 1e-15:
                best = (score, f, thr)
        if best is None or best[0] >= parent - 1e-15:
            return node
        _, f, thr = best
        mask = X[idx, f] <= thr
        tree.feature[node] = int(f)
        tree.threshold[node] = float(thr)
        tree.left[node] = build(idx[mask], depth + 1)
        tree.right[node] = build(idx[~mask], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return tree


class DecisionTreeRegressor(RegressorMixin, BaseEstimator):
    """CART regression tree with weighted-variance splits."""

    def __init__(self, max_depth: int | None = None, min_leaf: int = 1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y, sample_weight=None):
        X, y = check_xy(X, y)
        w = _weights(sample_weight, y.size)
        self.tree_ = _grow(
            X, y, w,
            classification=False, n_classes=0,
            max_depth=self.max_depth, min_leaf=self.min_leaf,
            max_features=None, rng=None,
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        _require(self, "tree_")
        return self.tree_.apply(check_matrix(X))[:, 0]


class DecisionTreeClassifier(ClassifierMixin, BaseEstimator):
    """CART classification tree with weighted-Gini splits."""

    def __init__(self, max_depth: int | None = None, min_leaf: int = 1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf

    def fit(self, X, y, sample_weight=None):
        X, y = check_xy(X, y)
        w = _weights(sample_weight, y.size)
        self.classes_, coded = np.unique(y, return_inverse=True)
        self.tree_ = _grow(
            X, coded.astype(float), w,
            classification=True, n_classes=self.classes_.size,
            max_depth=self.max_depth, min_leaf=self.min_leaf,
            max_features=None, rng=None,
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        _require(self, "tree_")
        return self.tree_.apply(check_matrix(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class RandomForestRegressor(RegressorMixin, BaseEstimator):
    """Bagged CART trees: bootstrap rows, sqrt(d) feature subsampling per split."""

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_leaf: int = 5, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        X, y = check_xy(X, y)
        rng = np.random.default_rng(self.seed)
        n, d = X.shape
        k = max(1, int(round(np.sqrt(d))))
        w = np.ones(n)
        self.trees_ = []
        for _ in range(self.n_trees):
            rows = rng.integers(0, n, size=n)
            self.trees_.append(
                _grow(
                    X[rows], y[rows], w,
                    classification=False, n_classes=0,
                    max_depth=self.max_depth, min_leaf=self.min_leaf,
                    max_features=k, rng=rng,
                )
            )
        self.n_features_in_ = d
        return self

    def predict(self, X):
        _require(self, "trees_")
        X = check_matrix(X)
        preds = np.stack([t.apply(X)[:, 0] for t in self.trees_])
        return preds.mean(axis=0)


class RusBoostClassifier(ClassifierMixin, BaseEstimator):
    """Boosted shallow trees with per-round random undersampling.

    Every round draws a class-balanced subsample (each majority class cut
    down to the minority count, without replacement), fits a weak tree under
    the current sample weights, then measures its weighted error on the full
    training set. Rounds with error >= 0.5 are skipped and resampled; weights
    of correctly classified samples shrink by beta = err / (1 - err). Votes
    are combined with log(1 / beta) weights.
    """

    def __init__(self, n_rounds: int = 50, max_depth: int = 3, min_leaf: int = 1,
                 seed: int = 0, max_skips: int = 25):
        self.n_rounds = n_rounds
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.max_skips = max_skips

    def fit(self, X, y):
        X, y = check_xy(X, y)
        self.classes_, coded = np.unique(y, return_inverse=True)
        if self.classes_.size < 2:
            raise SingleClassError("boosting needs at least two classes")
        rng = np.random.default_rng(self.seed)
        n = y.size
        weights = np.full(n, 1.0 / n)
        per_class = [np.flatnonzero(coded == c) for c in range(self.classes_.size)]
        n_min = min(idx.size for idx in per_class)

        self.trees_: list[_TreeArrays] = []
        self.stage_weights_: list[float] = []
        skips = 0
        while len(self.trees_) < self.n_rounds and skips < self.max_skips:
            sample = np.concatenate(
                [rng.choice(idx, size=n_min, replace=False) for idx in per_class]
            )
            tree = _grow(
                X[sample], coded[sample].astype(float), weights[sample],
                classification=True, n_classes=self.classes_.size,
                max_depth=self.max_depth, min_leaf=self.min_leaf,
                max_features=None, rng=None,
            )
            pred = np.argmax(tree.apply(X), axis=1)
            wrong = pred != coded
            err = float(weights[wrong].sum() / weights.sum())
            if err >= 0.5:
                skips += 1
                continue
            skips = 0
            err = max(err, _EPS_ERROR)
            beta = err / (1.0 - err)
            weights = np.where(wrong, weights, weights * beta)
            weights /= weights.sum()
            self.trees_.append(tree)
            self.stage_weights_.append(float(np.log(1.0 / beta)))
        self.sample_weights_ = weights
        self.n_features_in_ = X.shape[1]
        return self

    def decision_scores(self, X):
        """Per-class accumulated vote weight, normalized to sum to 1 per row."""
        _require(self, "trees_")
        X = check_matrix(X)
        votes = np.zeros((X.shape[0], self.classes_.size))
        for tree, stage_w in zip(self.trees_, self.stage_weights_):
            pred = np.argmax(tree.apply(X), axis=1)
            votes[np.arange(X.shape[0]), pred] += stage_w
        total = votes.sum(axis=1, keepdims=True)
        return np.divide(votes, total, out=np.full_like(votes, 1.0 / votes.shape[1]),
                         where=total > 0)

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_scores(X), axis=1)]


def _weights(sample_weight, n: int) -> np.ndarray:
    if sample_weight is None:
        return np.ones(n)
    w = np.asarray(sample_weight, dtype=float).ravel()
    if w.size != n or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("sample_weight must be n nonnegative finite values")
    return w


def _require(est, attr: str) -> None:
    if not hasattr(est, attr):
        raise NotFittedError("fit the model before predicting")
