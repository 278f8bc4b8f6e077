"""From-scratch predictor suite with a scikit-learn style estimator API."""

from .base import Dataset, check_matrix, check_xy, cluster_gmfcs
from .decomposition import PrincipalComponents
from .linear import LinearRegressor, StepwiseRegressor
from .mlp import MlpRegressor, loss_and_gradient, numerical_gradient
from .serialize import (
    MODEL_KIND_NAMES,
    estimator_class,
    make_estimator_state,
    restore_estimator,
)
from .svr import SvrRegressor
from .trees import (
    DecisionTreeClassifier,
    DecisionTreeRegressor,
    RandomForestRegressor,
    RusBoostClassifier,
)

__all__ = [
    "MODEL_KIND_NAMES",
    "estimator_class",
    "make_estimator_state",
    "restore_estimator",
    "Dataset",
    "check_matrix",
    "check_xy",
    "cluster_gmfcs",
    "PrincipalComponents",
    "LinearRegressor",
    "StepwiseRegressor",
    "MlpRegressor",
    "loss_and_gradient",
    "numerical_gradient",
    "SvrRegressor",
    "DecisionTreeClassifier",
    "DecisionTreeRegressor",
    "RandomForestRegressor",
    "RusBoostClassifier",
]
