import numpy as np
import pytest

from gaitpipe.errors import LengthMismatchError, TooFewSamplesError
from gaitpipe.evaluation import (
    auc_binary,
    classification_metrics,
    cross_validate,
    grid_search,
    make_split,
    regression_metrics,
)
from gaitpipe.models import LinearRegressor, SvrRegressor


class TestMakeSplit:
    def test_five_folds_of_two(self):
        plan = make_split(10, "kfold", seed=0, k=5)
        sizes = [len(plan.fold_indices(i)) for i in range(5)]
        assert sizes == [2, 2, 2, 2, 2]

    def test_holdout_70_15_15(self):
        plan = make_split(100, "holdout", seed=1)
        sizes = [int(np.sum(plan.assignment == p)) for p in range(3)]
        assert sizes == [70, 15, 15]

    def test_same_seed_same_assignment(self):
        a = make_split(57, "kfold", seed=9, k=5)
        b = make_split(57, "kfold", seed=9, k=5)
        assert np.array_equal(a.assignment, b.assignment)

    def test_partition_property(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            n = int(rng.integers(10, 200))
            k = int(rng.integers(2, 9))
            plan = make_split(n, "kfold", seed=int(rng.integers(1000)), k=k)
            folds = [plan.fold_indices(i) for i in range(k)]
            union = np.sort(np.concatenate(folds))
            assert np.array_equal(union, np.arange(n))
            sizes = [f.size for f in folds]
            assert max(sizes) - min(sizes) <= 1

    def test_buckets_is_four_folds(self):
        plan = make_split(40, "buckets", seed=0)
        assert plan.n_folds == 4

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamplesError):
            make_split(3, "kfold", seed=0, k=5)
        with pytest.raises(TooFewSamplesError):
            make_split(2, "holdout", seed=0)


class TestRegressionMetrics:
    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        rep = regression_metrics(y, y)
        assert rep.mse == 0.0 and rep.r2 == 1.0

    def test_mean_predictor(self):
        y = np.array([1.0, 2.0, 3.0, 6.0])
        rep = regression_metrics(y, np.full(4, y.mean()))
        assert rep.r2 == 0.0

    def test_hand_example(self):
        # SS_res = 1, SS_tot = 2 -> mse 1/3, r2 0.5
        rep = regression_metrics([0, 1, 2], [0, 1, 1])
        assert rep.mse == pytest.approx(1 / 3)
        assert rep.r2 == pytest.approx(0.5)
        assert rep.rmse == pytest.approx(np.sqrt(rep.mse), abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            regression_metrics([1, 2], [1])

    def test_r2_undefined_for_constant_truth(self):
        rep = regression_metrics([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert not rep.r2_defined


class TestClassificationMetrics:
    def test_perfect_classifier(self):
        y = np.array([0, 0, 1, 1])
        rep = classification_metrics(y, y, scores=np.array([0.1, 0.2, 0.9, 0.8]))
        assert rep.accuracy == 1.0
        assert rep.auc == 1.0
        assert np.array_equal(rep.confusion, np.array([[2, 0], [0, 2]]))

    def test_identical_scores_auc_half(self):
        y = np.array([0, 1, 0, 1])
        rep = classification_metrics(y, y, scores=np.full(4, 0.5))
        assert rep.auc == pytest.approx(0.5)

    def test_hand_auc(self):
        assert auc_binary(np.array([0, 0, 1, 1]), np.array([0.1, 0.4, 0.35, 0.8])) == pytest.approx(0.75)

    def test_confusion_rows_are_true_class(self):
        rep = classification_metrics([0, 0, 1], [1, 0, 1])
        assert np.array_equal(rep.confusion, np.array([[1, 1], [0, 1]]))
        assert rep.confusion[0].sum() == 2  # row sums = per-class true counts

    def test_single_class_auc_flagged(self):
        rep = classification_metrics([1, 1, 1], [1, 1, 1], scores=np.array([0.1, 0.2, 0.3]))
        assert not rep.auc_defined

    def test_auc_monotone_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            y = rng.integers(0, 2, size=30)
            if y.min() == y.max():
                continue
            s = rng.normal(size=30)
            a = auc_binary(y, s)
            assert auc_binary(y, np.exp(s)) == pytest.approx(a, abs=1e-12)
            assert auc_binary(y, 3 * s - 10) == pytest.approx(a, abs=1e-12)

    def test_multiclass_macro_ovr(self):
        y = np.array([0, 1, 2, 0, 1, 2])
        scores = np.eye(3)[y]  # perfect one-hot scores
        rep = classification_metrics(y, y, scores=scores)
        assert rep.auc == pytest.approx(1.0)


class TestCrossValidateAndGrid:
    def planted(self, seed=0, n=60):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(n, 3))
        y = X @ np.array([1.0, -1.0, 2.0]) + 0.05 * rng.normal(size=n)
        return X, y

    def test_cross_validate_reproducible(self):
        X, y = self.planted()
        plan = make_split(len(y), "kfold", seed=4, k=5)
        a = cross_validate(X, y, LinearRegressor(), plan)
        b = cross_validate(X, y, LinearRegressor(), plan)
        assert a.mse == b.mse and a.r2 == b.r2
        assert a.per_fold == b.per_fold

    def test_cross_validate_holdout(self):
        X, y = self.planted(n=100)
        plan = make_split(len(y), "holdout", seed=0)
        rep = cross_validate(X, y, LinearRegressor(), plan)
        assert rep.r2 > 0.95

    def test_grid_prefers_better_cell(self):
        X, y = self.planted(seed=5, n=80)
        plan = make_split(len(y), "buckets", seed=0)
        result = grid_search(
            X, y, SvrRegressor(kernel="rbf"), {"C": [0.001, 10.0], "gamma": [0.3]}, plan
        )
        assert result.best_params == {"C": 10.0, "gamma": 0.3}
        assert len(result.table) == 2

    def test_single_cell_grid(self):
        X, y = self.planted(seed=6)
        plan = make_split(len(y), "kfold", seed=0, k=4)
        result = grid_search(X, y, LinearRegressor(), {"ridge_lambda": [0.1]}, plan)
        assert result.best_params == {"ridge_lambda": 0.1}

    def test_failed_cell_recorded_and_skipped(self):
        X, y = self.planted(seed=7)
        plan = make_split(len(y), "kfold", seed=0, k=4)
        result = grid_search(
            X, y, SvrRegressor(kernel="rbf"), {"C": [-1.0, 1.0], "gamma": [1.0]}, plan
        )
        assert result.best_params == {"C": 1.0, "gamma": 1.0}
        failed = [row for row in result.table if row["failed"]]
        assert len(failed) == 1 and failed[0]["C"] == -1.0

    def test_classification_cv_with_rare_class(self):
        # some folds lack the rare class entirely; confusions must still merge
        from gaitpipe.models import DecisionTreeClassifier

        rng = np.random.default_rng(9)
        X = rng.normal(size=(40, 2))
        y = np.zeros(40, dtype=int)
        y[X[:, 0] > 0] = 1
        y[:3] = 2  # rare class
        plan = make_split(40, "kfold", seed=0, k=4)
        rep = cross_validate(X, y, DecisionTreeClassifier(max_depth=2), plan,
                             task="classification")
        assert rep.confusion.shape == (3, 3)
        assert rep.confusion.sum() == 40

    def test_degenerate_fold_does_not_poison_grid(self):
        # one fold's test targets are constant: its R^2 is undefined, but the
        # remaining folds still rank the cells
        from gaitpipe.evaluation import SplitPlan

        rng = np.random.default_rng(10)
        X = rng.normal(size=(40, 2))
        y = X @ np.array([1.0, -0.5])
        assignment = np.repeat(np.arange(4), 10)
        y[assignment == 0] = 5.0  # constant targets in fold 0
        plan = SplitPlan(kind="kfold", seed=0, assignment=assignment, n_folds=4)
        rep = cross_validate(X, y, LinearRegressor(), plan)
        assert rep.r2_defined and np.isfinite(rep.r2)
        result = grid_search(X, y, LinearRegressor(), {"ridge_lambda": [1e-6, 1e6]}, plan)
        assert np.isfinite(result.best_score)
        assert result.best_params == {"ridge_lambda": 1e-6}

    def test_tie_breaks_toward_first_listed(self):
        # gamma does not enter the linear kernel, so every cell scores
        # identically and the first listed value must win
        X, y = self.planted(seed=8, n=40)
        plan = make_split(40, "kfold", seed=0, k=4)
        result = grid_search(
            X, y, SvrRegressor(kernel="linear", C=1.0), {"gamma": [0.1, 1.0, 10.0]}, plan
        )
        assert result.best_params == {"gamma": 0.1}
