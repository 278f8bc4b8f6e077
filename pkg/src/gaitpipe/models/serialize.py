"""Flat-text state encoding for every model kind.

Hyperparameters go through repr/literal_eval; fitted arrays go through the
17-digit float format, so a saved model reproduces its predictions bit for
bit. Readers ignore keys they do not recognize, which is what lets newer
minor format versions stay loadable.
"""

from __future__ import annotations

import ast

import numpy as np

from ..errors import UnknownKindError
from ..textio import fmt_float, fmt_ivec, fmt_mat, fmt_vec, parse_ivec, parse_mat, parse_vec
from .linear import LinearRegressor, StepwiseRegressor
from .mlp import MlpRegressor
from .svr import SvrRegressor
from .trees import (
    DecisionTreeClassifier,
    DecisionTreeRegressor,
    RandomForestRegressor,
    RusBoostClassifier,
    _TreeArrays,
)

REGRESSION = "regression"
CLASSIFICATION = "classification"

_CLASSES = {
    ("linear", REGRESSION): LinearRegressor,
    ("stepwise", REGRESSION): StepwiseRegressor,
    ("forest", REGRESSION): RandomForestRegressor,
    ("svr", REGRESSION): SvrRegressor,
    ("mlp", REGRESSION): MlpRegressor,
    ("tree", REGRESSION): DecisionTreeRegressor,
    ("tree", CLASSIFICATION): DecisionTreeClassifier,
    ("rusboost", CLASSIFICATION): RusBoostClassifier,
}

MODEL_KIND_NAMES = tuple(sorted({kind for kind, _ in _CLASSES}))


def estimator_class(kind: str, task: str):
    try:
        return _CLASSES[(kind, task)]
    except KeyError:
        raise UnknownKindError(
            f"no model kind {kind!r} for task {task!r}; known kinds: {', '.join(MODEL_KIND_NAMES)}"
        ) from None


def _encode_tree(prefix: str, tree: _TreeArrays, out: dict[str, str]) -> None:
    out[f"{prefix}.feature"] = fmt_ivec(tree.feature)
    out[f"{prefix}.threshold"] = fmt_vec(tree.threshold)
    out[f"{prefix}.left"] = fmt_ivec(tree.left)
    out[f"{prefix}.right"] = fmt_ivec(tree.right)
    out[f"{prefix}.value"] = fmt_mat(np.vstack(tree.value))


def _decode_tree(prefix: str, body: dict[str, str]) -> _TreeArrays:
    tree = _TreeArrays()
    tree.feature = parse_ivec(body[f"{prefix}.feature"]).tolist()
    tree.threshold = parse_vec(body[f"{prefix}.threshold"]).tolist()
    tree.left = parse_ivec(body[f"{prefix}.left"]).tolist()
    tree.right = parse_ivec(body[f"{prefix}.right"]).tolist()
    tree.value = [row for row in parse_mat(body[f"{prefix}.value"])]
    return tree


def _classes_to_text(classes: np.ndarray) -> str:
    return fmt_vec(np.asarray(classes, dtype=float))


def _classes_from_text(s: str) -> np.ndarray:
    values = parse_vec(s)
    as_int = values.astype(int)
    return as_int if np.all(as_int == values) else values


def make_estimator_state(kind: str, task: str, est) -> tuple[dict[str, str], dict[str, str]]:
    """(hyperparameters, fitted state), both as flat string maps."""
    estimator_class(kind, task)  # validate the pairing
    params = {name: repr(value) for name, value in sorted(est.get_params().items())}
    state: dict[str, str] = {}
    if kind in ("linear", "stepwise"):
        state["weights"] = fmt_vec(est.weights_)
        state["intercept"] = fmt_float(est.intercept_)
        state["n_features_in"] = str(est.n_features_in_)
        if kind == "stepwise":
            state["selected"] = fmt_ivec(est.selected_)
            state["cv_mse"] = fmt_float(est.cv_mse_)
    elif kind == "svr":
        state["support_vectors"] = fmt_mat(est.support_vectors_)
        state["dual_coef"] = fmt_vec(est.dual_coef_)
        state["intercept"] = fmt_float(est.intercept_)
        state["gamma"] = fmt_float(est.gamma_)
        state["converged"] = str(int(est.converged_))
        state["kkt_gap"] = fmt_float(est.kkt_gap_)
        state["n_features_in"] = str(est.n_features_in_)
    elif kind == "mlp":
        state["layer_sizes"] = fmt_ivec(est.layer_sizes_)
        for i, (W, b) in enumerate(est.layers_):
            state[f"w{i}"] = fmt_mat(W)
            state[f"b{i}"] = fmt_vec(b)
    elif kind == "tree":
        _encode_tree("tree", est.tree_, state)
        state["n_features_in"] = str(est.n_features_in_)
        if task == CLASSIFICATION:
            state["classes"] = _classes_to_text(est.classes_)
    elif kind == "forest":
        state["n_trees"] = str(len(est.trees_))
        state["n_features_in"] = str(est.n_features_in_)
        for i, tree in enumerate(est.trees_):
            _encode_tree(f"tree{i:03d}", tree, state)
    elif kind == "rusboost":
        state["classes"] = _classes_to_text(est.classes_)
        state["stage_weights"] = fmt_vec(est.stage_weights_)
        state["n_features_in"] = str(est.n_features_in_)
        for i, tree in enumerate(est.trees_):
            _encode_tree(f"tree{i:03d}", tree, state)
    else:
        raise UnknownKindError(f"no state encoder for kind {kind!r}")
    return params, state


def restore_estimator(kind: str, task: str, params: dict[str, str], state: dict[str, str]):
    cls = estimator_class(kind, task)
    known = set(cls().get_params())
    kwargs = {
        name: ast.literal_eval(value) for name, value in params.items() if name in known
    }
    est = cls(**kwargs)
    if kind in ("linear", "stepwise"):
        est.weights_ = parse_vec(state["weights"])
        est.intercept_ = float(state["intercept"])
        est.n_features_in_ = int(state["n_features_in"])
        if kind == "stepwise":
            est.selected_ = tuple(parse_ivec(state["selected"]).tolist())
            est.cv_mse_ = float(state["cv_mse"])
    elif kind == "svr":
        est.support_vectors_ = parse_mat(state["support_vectors"])
        est.dual_coef_ = parse_vec(state["dual_coef"])
        est.intercept_ = float(state["intercept"])
        est.gamma_ = float(state["gamma"])
        est.converged_ = bool(int(state["converged"]))
        est.kkt_gap_ = float(state["kkt_gap"])
        est.n_features_in_ = int(state["n_features_in"])
    elif kind == "mlp":
        sizes = tuple(parse_ivec(state["layer_sizes"]).tolist())
        layers = []
        for i in range(len(sizes) - 1):
            W = parse_mat(state[f"w{i}"]).reshape(sizes[i], sizes[i + 1])
            layers.append((W, parse_vec(state[f"b{i}"])))
        est.layers_ = layers
        est.layer_sizes_ = sizes
        est.history_ = {"train": [], "val": []}
        est.n_features_in_ = sizes[0]
    elif kind == "tree":
        est.tree_ = _decode_tree("tree", state)
        est.n_features_in_ = int(state["n_features_in"])
        if task == CLASSIFICATION:
            est.classes_ = _classes_from_text(state["classes"])
    elif kind == "forest":
        est.trees_ = [
            _decode_tree(f"tree{i:03d}", state) for i in range(int(state["n_trees"]))
        ]
        est.n_features_in_ = int(state["n_features_in"])
    elif kind == "rusboost":
        est.classes_ = _classes_from_text(state["classes"])
        est.stage_weights_ = parse_vec(state["stage_weights"]).tolist()
        n_trees = len(est.stage_weights_)
        est.trees_ = [_decode_tree(f"tree{i:03d}", state) for i in range(n_trees)]
        est.n_features_in_ = int(state["n_features_in"])
    return est
