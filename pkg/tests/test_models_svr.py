import numpy as np
import pytest

from gaitpipe.models import SvrRegressor
from gaitpipe.models.svr import kernel_matrix


def r2(y, pred):
    return 1.0 - np.sum((pred - y) ** 2) / np.sum((y - y.mean()) ** 2)


class TestSvr:
    def test_planted_linear(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(80, 1))
        y = 3.0 * X[:, 0]
        Xt = rng.normal(size=(40, 1))
        m = SvrRegressor(kernel="linear", C=10.0, epsilon=0.01).fit(X, y)
        assert r2(3.0 * Xt[:, 0], m.predict(Xt)) >= 0.999
        assert m.converged_

    def test_constant_targets(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 3))
        for kernel in ("linear", "rbf", "poly"):
            m = SvrRegressor(kernel=kernel, gamma=1.0, C=1.0, epsilon=0.1).fit(X, np.full(50, 4.2))
            assert np.allclose(m.predict(X), 4.2, atol=0.1 + 1e-12)

    def test_reference_hyperparameters_fit(self):
        # the reference (C, gamma) operating points - (1,1) for cadence and
        # speed, (0.1,1) for step length - must fit real band-power features
        from gaitpipe.models import Dataset
        from gaitpipe.spectral import feature_matrix
        from gaitpipe.synth import generate_dataset

        rows = generate_dataset(30, seed=17)
        for target, C, gamma in (
            ("cadence", 1.0, 1.0), ("step_length", 0.1, 1.0), ("speed", 1.0, 1.0)
        ):
            X, y, names = feature_matrix(rows, target)
            ds = Dataset.standardize(X, y, names)
            ys = (ds.y - ds.y.mean()) / ds.y.std()
            m = SvrRegressor(kernel="rbf", C=C, gamma=gamma).fit(ds.X, ys)
            pred = m.predict(ds.X)
            assert np.all(np.isfinite(pred))
            assert r2(ys, pred) > 0.0  # better than the mean on its own data

    def test_dual_coefficients_bounded(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(60, 2))
        y = np.sin(X[:, 0]) + 0.2 * rng.normal(size=60)
        C = 2.5
        m = SvrRegressor(kernel="rbf", gamma=0.5, C=C, epsilon=0.05).fit(X, y)
        assert np.all(np.abs(m.dual_coef_) <= C + 1e-12)

    def test_kkt_gap_at_convergence(self):
        rng = np.random.default_rng(4)
        for seed in range(5):
            r = np.random.default_rng(seed)
            X = r.normal(size=(40, 3))
            y = X @ r.normal(size=3) + 0.1 * r.normal(size=40)
            m = SvrRegressor(kernel="rbf", gamma=1.0, C=1.0).fit(X, y)
            assert m.converged_
            assert m.kkt_gap_ <= 1e-3

    def test_kkt_conditions_recomputed(self):
        # rebuild the dual gradient from scratch and recheck the worst
        # epsilon-KKT violation of the returned coefficients
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 2))
        y = X[:, 0] ** 2 + 0.1 * rng.normal(size=50)
        C, eps, tol = 1.0, 0.1, 1e-3
        m = SvrRegressor(kernel="rbf", gamma=1.0, C=C, epsilon=eps, tol=tol).fit(X, y)
        K = kernel_matrix("rbf", X, X, m.gamma_, 3, 0.0)
        beta = np.zeros(50)
        for row, coef in zip(m.support_vectors_, m.dual_coef_):
            beta[np.flatnonzero((X == row).all(axis=1))[0]] = coef
        alpha = np.concatenate([np.clip(beta, 0, None), np.clip(-beta, 0, None)])
        z = np.concatenate([np.ones(50), -np.ones(50)])
        g = np.concatenate([K @ beta + eps - y, -(K @ beta) + eps + y])
        up = ((z > 0) & (alpha < C)) | ((z < 0) & (alpha > 0))
        down = ((z < 0) & (alpha < C)) | ((z > 0) & (alpha > 0))
        gap = np.max(-z[up] * g[up]) - np.min(-z[down] * g[down])
        assert gap <= tol + 1e-12

    def test_nonconvergence_flagged_not_raised(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(60, 2))
        y = rng.normal(size=60)
        m = SvrRegressor(kernel="rbf", gamma=5.0, C=100.0, max_iter=3).fit(X, y)
        assert not m.converged_
        assert np.all(np.isfinite(m.predict(X)))

    def test_gamma_scale(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(30, 4)) * 2.0
        m = SvrRegressor(kernel="rbf", gamma="scale").fit(X, rng.normal(size=30))
        assert m.gamma_ == pytest.approx(1.0 / (4 * X.var()))

    def test_parameter_validation(self):
        X = np.zeros((4, 1))
        y = np.zeros(4)
        with pytest.raises(ValueError):
            SvrRegressor(C=0.0).fit(X, y)
        with pytest.raises(ValueError):
            SvrRegressor(epsilon=-1.0).fit(X, y)
        with pytest.raises(ValueError):
            SvrRegressor(kernel="sigmoid").fit(np.ones((4, 1)), y)
