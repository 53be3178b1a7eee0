"""Classifiers, evaluation metrics, cross-validation, and model persistence."""

from .bayes import MultinomialNB
from .forest import DecisionTree, RandomForest
from .linear import LinearSVM, LogisticRegression, lr_objective, svm_objective
from .metrics import NEGATIVE_LABEL, POSITIVE_LABEL, Metrics, evaluate
from .model_io import load_model, model_from_json, model_to_json, save_model
from .training import (
    DEFAULT_C,
    FAMILIES,
    TrainConfig,
    TrainedModel,
    balanced_weights,
    predict,
    train,
)
from .validate import (
    CVResult,
    GridSearchResult,
    cross_validate,
    grid_search,
    stratified_kfold,
)

__all__ = [
    "MultinomialNB",
    "DecisionTree",
    "RandomForest",
    "LinearSVM",
    "LogisticRegression",
    "lr_objective",
    "svm_objective",
    "Metrics",
    "evaluate",
    "POSITIVE_LABEL",
    "NEGATIVE_LABEL",
    "load_model",
    "save_model",
    "model_to_json",
    "model_from_json",
    "TrainConfig",
    "TrainedModel",
    "FAMILIES",
    "DEFAULT_C",
    "balanced_weights",
    "train",
    "predict",
    "CVResult",
    "GridSearchResult",
    "cross_validate",
    "grid_search",
    "stratified_kfold",
]
