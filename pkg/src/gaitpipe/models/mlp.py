"""Small feed-forward regressor: tanh hidden layers, identity output,
mini-batch gradient descent with momentum on squared error.

The analytic gradient is exposed separately (`loss_and_gradient`) so it can
be checked against finite differences.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from ..errors import DivergedLossError
from .base import check_matrix, check_xy


def init_layers(
    sizes: tuple[int, ...], rng: np.random.Generator
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Symmetric uniform init scaled by fan-in + fan-out, biases at zero."""
    layers = []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        W = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        layers.append((W, np.zeros(fan_out)))
    return layers


def forward(layers, X: np.ndarray) -> list[np.ndarray]:
    """Activations per layer; tanh everywhere except the identity output."""
    acts = [X]
    h = X
    for li, (W, b) in enumerate(layers):
        pre = h @ W + b
        h = pre if li == len(layers) - 1 else np.tanh(pre)
        acts.append(h)
    return acts


def loss_and_gradient(layers, X: np.ndarray, y: np.ndarray):
    """Mean squared error over the batch and its gradient per parameter."""
    n = X.shape[0]
    acts = forward(layers, X)
    pred = acts[-1][:, 0]
    resid = pred - y
    loss = float(np.mean(resid**2))

    grads = []
    delta = (2.0 / n) * resid[:, None]  # d loss / d output
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        a_prev = acts[li]
        gW = a_prev.T @ delta
        gb = delta.sum(axis=0)
        grads.append((gW, gb))
        if li > 0:
            delta = (delta @ W.T) * (1.0 - acts[li] ** 2)
    grads.reverse()
    return loss, grads


class MlpRegressor(RegressorMixin, BaseEstimator):
    """Feed-forward network trained by seeded mini-batch SGD with momentum.

    A validation slice is split off for early stopping: training stops after
    `patience` epochs without improvement and the best-validation weights are
    restored. Loss curves are kept in `history_`.
    """

    def __init__(
        self,
        hidden_sizes: tuple[int, ...] = (10, 10),
        learning_rate: float = 0.05,
        momentum: float = 0.9,
        epochs: int = 500,
        batch_size: int = 32,
        validation_fraction: float = 0.15,
        patience: int = 50,
        seed: int = 0,
    ):
        self.hidden_sizes = hidden_sizes
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.patience = patience
        self.seed = seed

    def fit(self, X, y):
        X, y = check_xy(X, y)
        n, d = X.shape
        rng = np.random.default_rng(self.seed)
        sizes = (d, *self.hidden_sizes, 1)
        layers = init_layers(sizes, rng)
        velocity = [(np.zeros_like(W), np.zeros_like(b)) for W, b in layers]

        n_val = int(round(n * self.validation_fraction))
        n_val = min(max(n_val, 0), n - 1)
        perm = rng.permutation(n)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        Xt, yt = X[train_idx], y[train_idx]
        Xv, yv = X[val_idx], y[val_idx]

        history = {"train": [], "val": []}
        best_val = np.inf
        best_layers = [(W.copy(), b.copy()) for W, b in layers]
        stall = 0
        for _ in range(self.epochs):
            order = rng.permutation(len(yt))
            for start in range(0, len(yt), self.batch_size):
                batch = order[start : start + self.batch_size]
                with np.errstate(over="ignore", invalid="ignore"):
                    loss, grads = loss_and_gradient(layers, Xt[batch], yt[batch])
                if not np.isfinite(loss):
                    raise DivergedLossError(
                        f"non-finite training loss after {len(history['train'])} epochs; "
                        f"trace: {history['train'][-5:]}"
                    )
                for li, ((W, b), (vW, vb), (gW, gb)) in enumerate(
                    zip(layers, velocity, grads)
                ):
                    vW = self.momentum * vW - self.learning_rate * gW
                    vb = self.momentum * vb - self.learning_rate * gb
                    layers[li] = (W + vW, b + vb)
                    velocity[li] = (vW, vb)
            train_loss, _ = loss_and_gradient(layers, Xt, yt)
            history["train"].append(train_loss)
            if n_val:
                val_loss, _ = loss_and_gradient(layers, Xv, yv)
                history["val"].append(val_loss)
                if val_loss < best_val - 1e-12:
                    best_val = val_loss
                    best_layers = [(W.copy(), b.copy()) for W, b in layers]
                    stall = 0
                else:
                    stall += 1
                    if stall > self.patience:
                        break

        self.layers_ = best_layers if n_val else layers
        self.history_ = history
        self.layer_sizes_ = sizes
        self.n_features_in_ = d
        return self

    def predict(self, X):
        if not hasattr(self, "layers_"):
            raise NotFittedError("fit the model before predicting")
        X = check_matrix(X)
        return forward(self.layers_, X)[-1][:, 0]


def flatten_params(layers) -> np.ndarray:
    return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in layers])


def unflatten_params(flat: np.ndarray, sizes: tuple[int, ...]):
    layers = []
    pos = 0
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        W = flat[pos : pos + fan_in * fan_out].reshape(fan_in, fan_out)
        pos += fan_in * fan_out
        b = flat[pos : pos + fan_out]
        pos += fan_out
        layers.append((W.copy(), b.copy()))
    return layers


def numerical_gradient(
    layers, X: np.ndarray, y: np.ndarray, coords: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central finite differences of the batch loss at selected coordinates."""
    sizes = tuple([layers[0][0].shape[0]] + [W.shape[1] for W, _ in layers])
    flat = flatten_params(layers)

    def loss_at(theta: np.ndarray) -> float:
        pred = forward(unflatten_params(theta, sizes), X)[-1][:, 0]
        return float(np.mean((pred - y) ** 2))

    out = np.empty(len(coords))
    bumped = flat.copy()
    for k, c in enumerate(coords):
        bumped[c] = flat[c] + h
        lo_plus = loss_at(bumped)
        bumped[c] = flat[c] - h
        lo_minus = loss_at(bumped)
        bumped[c] = flat[c]
        out[k] = (lo_plus - lo_minus) / (2.0 * h)
    return out
