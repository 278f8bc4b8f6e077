import numpy as np
import pytest

from gaitpipe.errors import BadLevelError, SingularSystemError
from gaitpipe.models import (
    Dataset,
    LinearRegressor,
    PrincipalComponents,
    StepwiseRegressor,
    cluster_gmfcs,
)


class TestLinearRegressor:
    def test_planted_coefficients(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(60, 2))
        y = 2.0 * X[:, 0] - 3.0 * X[:, 1] + 1.0
        m = LinearRegressor().fit(X, y)
        assert np.allclose(m.weights_, [2.0, -3.0], atol=1e-6)
        assert m.intercept_ == pytest.approx(1.0, abs=1e-6)

    def test_constant_target(self):
        X = np.random.default_rng(1).normal(size=(30, 3))
        m = LinearRegressor().fit(X, np.full(30, 7.5))
        assert np.allclose(m.weights_, 0.0, atol=1e-9)
        assert m.intercept_ == pytest.approx(7.5)

    def test_ridge_limit_shrinks_weights(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(50, 4))
        y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + 0.3
        m = LinearRegressor(ridge_lambda=1e12).fit(X, y)
        assert np.max(np.abs(m.weights_)) < 1e-6
        assert m.intercept_ == pytest.approx(y.mean(), abs=1e-6)

    def test_residual_gradient_condition(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(80, 5))
        y = rng.normal(size=80)
        for lam in (0.0, 0.7):
            m = LinearRegressor(ridge_lambda=lam).fit(X, y)
            grad = X.T @ (X @ m.weights_ + m.intercept_ - y) + lam * m.weights_
            assert np.max(np.abs(grad)) <= 1e-8 * X.shape[0]

    def test_singular_system(self):
        rng = np.random.default_rng(4)
        col = rng.normal(size=(40, 1))
        X = np.hstack([col, col])  # exactly collinear
        y = rng.normal(size=40)
        with pytest.raises(SingularSystemError):
            LinearRegressor().fit(X, y)
        LinearRegressor(ridge_lambda=1e-6).fit(X, y)  # regularized fit succeeds

    def test_standardization_invariance(self):
        # rescaling a raw feature must not change standardized-fit predictions
        rng = np.random.default_rng(5)
        X = rng.normal(size=(50, 3))
        y = X @ np.array([1.0, 2.0, -1.0]) + rng.normal(0, 0.1, 50)
        scaled = X.copy()
        scaled[:, 1] = scaled[:, 1] * 250.0 - 3.0

        def predictions(X_raw):
            ds = Dataset.standardize(X_raw, y)
            m = LinearRegressor(ridge_lambda=0.5).fit(ds.X, ds.y)
            return m.predict(ds.X)

        assert np.allclose(predictions(X), predictions(scaled), atol=1e-9)


class TestStepwiseRegressor:
    def test_informative_feature_first(self):
        rng = np.random.default_rng(10)
        X = rng.normal(size=(120, 10))
        y = 4.0 * X[:, 3] + rng.normal(0, 0.1, 120)
        m = StepwiseRegressor().fit(X, y)
        assert m.selected_[0] == 3
        assert m.cv_mse_ < 0.05  # near the 0.01 noise floor

    def test_infinite_tol_selects_one(self):
        rng = np.random.default_rng(11)
        X = rng.normal(size=(60, 5))
        y = X[:, 2] + rng.normal(0, 0.1, 60)
        m = StepwiseRegressor(tol=np.inf).fit(X, y)
        assert len(m.selected_) == 1

    def test_pure_noise_stops_early(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(300, 8))
        y = rng.normal(size=300)
        m = StepwiseRegressor(seed=0).fit(X, y)
        assert len(m.selected_) <= 2

    def test_selection_order_recorded(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(200, 6))
        y = 3.0 * X[:, 5] + 1.0 * X[:, 0] + rng.normal(0, 0.05, 200)
        m = StepwiseRegressor().fit(X, y)
        assert m.selected_[0] == 5
        assert 0 in m.selected_


class TestPrincipalComponents:
    def test_rank_one_data(self):
        rng = np.random.default_rng(20)
        X = np.outer(rng.normal(size=60), np.array([1.0, 2.0, 3.0]))
        pc = PrincipalComponents(n_components=1).fit(X)
        total = pc.explained_variance_[0]
        full = np.trace(np.cov(X, rowvar=False))
        assert total / full >= 1.0 - 1e-9

    def test_isotropic_variances_close(self):
        rng = np.random.default_rng(21)
        X = rng.normal(size=(4000, 2))
        pc = PrincipalComponents(n_components=2).fit(X)
        v1, v2 = pc.explained_variance_
        assert v1 / v2 < 1.10

    def test_full_rank_reconstruction(self):
        rng = np.random.default_rng(22)
        X = rng.normal(size=(40, 5))
        pc = PrincipalComponents(n_components=5).fit(X)
        assert np.allclose(pc.inverse_transform(pc.transform(X)), X, atol=1e-8)

    def test_orthonormal_rows_descending_variance(self):
        rng = np.random.default_rng(23)
        X = rng.normal(size=(100, 6)) @ np.diag([5, 4, 3, 2, 1, 0.5])
        pc = PrincipalComponents(n_components=6).fit(X)
        gram = pc.components_ @ pc.components_.T
        assert np.allclose(gram, np.eye(6), atol=1e-8)
        assert np.all(np.diff(pc.explained_variance_) <= 1e-12)

    def test_variance_fraction_mode(self):
        rng = np.random.default_rng(24)
        X = rng.normal(size=(200, 4)) @ np.diag([10.0, 1.0, 0.1, 0.01])
        pc = PrincipalComponents(n_components=0.99).fit(X)
        assert pc.components_.shape[0] <= 2

    def test_deterministic_signs(self):
        rng = np.random.default_rng(25)
        X = rng.normal(size=(80, 3))
        a = PrincipalComponents(n_components=3).fit(X)
        b = PrincipalComponents(n_components=3).fit(X.copy())
        assert np.array_equal(a.components_, b.components_)


class TestClusterGmfcs:
    @pytest.mark.parametrize("level,expected", [(1, 0), (2, 1), (3, 1), (4, 2), (5, 2)])
    def test_mapping(self, level, expected):
        assert cluster_gmfcs(level) == expected

    def test_bad_level(self):
        with pytest.raises(BadLevelError):
            cluster_gmfcs(0)
        with pytest.raises(BadLevelError):
            cluster_gmfcs(6)
