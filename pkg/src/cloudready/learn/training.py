"""Training configuration and the train/predict entry points.

All four classifier families share one config record and one TrainedModel
wrapper. Labels are strings; the positive class is "Sensitive". Models
remember the fingerprint of the feature spec that produced their training
matrix, and predict refuses vectors from a different spec.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .bayes import MultinomialNB
from .forest import RandomForest
from .linear import LinearSVM, LogisticRegression
from .metrics import POSITIVE_LABEL

__all__ = [
    "FAMILIES",
    "DEFAULT_C",
    "TrainConfig",
    "TrainedModel",
    "balanced_weights",
    "train",
    "predict",
]

FAMILIES = ("MultinomialNB", "LogisticRegression", "LinearSVM", "RandomForest")

# Regularization defaults for the linear families (flagged, not asserted:
# these were tuned on corpora we do not ship).
DEFAULT_C = {"LogisticRegression": 0.9, "LinearSVM": 0.8}


@dataclass(frozen=True)
class TrainConfig:
    family: str = "RandomForest"
    C: float | None = None  # None resolves to the family default
    class_weight: str = "none"  # none | balanced
    nb_alpha: float = 1.0
    n_trees: int = 10
    max_depth: int | None = None
    bootstrap: bool = True
    feature_subset: str | int = "sqrt"
    svm_epochs: int = 30
    lr_max_iter: int = 1000
    lr_gtol: float = 1e-9
    seed: int = 42
    folds: int = 10

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.C is not None and self.C <= 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if self.class_weight not in ("none", "balanced"):
            raise ValueError(f"class_weight must be none|balanced, got {self.class_weight!r}")
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")

    def resolved_C(self) -> float:
        if self.C is not None:
            return self.C
        return DEFAULT_C.get(self.family, 1.0)

    def with_family(self, family: str) -> "TrainConfig":
        return replace(self, family=family)


@dataclass(frozen=True)
class TrainedModel:
    family: str
    classes: tuple[str, str]  # (negative label, positive label)
    estimator: object
    feature_spec_fingerprint: str = ""


def _label_codes(labels: Sequence[str], positive: str) -> tuple[np.ndarray, tuple[str, str]]:
    distinct = sorted(set(labels))
    if len(distinct) < 2:
        raise ValueError(f"training needs both classes; got only {distinct}")
    if len(distinct) > 2:
        raise ValueError(f"training labels must be binary; got {distinct}")
    if positive not in distinct:
        raise ValueError(f"positive label {positive!r} absent from labels {distinct}")
    negative = distinct[0] if distinct[1] == positive else distinct[1]
    y01 = np.fromiter((1 if lab == positive else 0 for lab in labels), dtype=np.int64)
    return y01, (negative, positive)


def balanced_weights(y01: np.ndarray) -> np.ndarray:
    """Per-sample weights total/(2 * class_count): inverse class frequency."""
    y01 = np.asarray(y01)
    n = y01.shape[0]
    n_pos = int(y01.sum())
    n_neg = n - n_pos
    w_pos = n / (2.0 * n_pos)
    w_neg = n / (2.0 * n_neg)
    return np.where(y01 == 1, w_pos, w_neg)


def train(
    X,
    labels: Sequence[str],
    config: TrainConfig,
    feature_spec_fingerprint: str = "",
    positive: str = POSITIVE_LABEL,
) -> TrainedModel:
    if X.shape[0] != len(labels):
        raise ValueError(f"matrix has {X.shape[0]} rows but {len(labels)} labels")
    y01, classes = _label_codes(labels, positive)
    weight = balanced_weights(y01) if config.class_weight == "balanced" else None

    if config.family == "MultinomialNB":
        estimator = MultinomialNB(alpha=config.nb_alpha).fit(X, y01, weight)
    elif config.family == "LogisticRegression":
        estimator = LogisticRegression(
            C=config.resolved_C(), max_iter=config.lr_max_iter, gtol=config.lr_gtol
        ).fit(X, y01, weight)
    elif config.family == "LinearSVM":
        estimator = LinearSVM(
            C=config.resolved_C(), epochs=config.svm_epochs, seed=config.seed
        ).fit(X, y01, weight)
    else:
        estimator = RandomForest(
            n_trees=config.n_trees,
            max_depth=config.max_depth,
            bootstrap=config.bootstrap,
            feature_subset=config.feature_subset,
            seed=config.seed,
        ).fit(X, y01, weight)
    return TrainedModel(
        family=config.family,
        classes=classes,
        estimator=estimator,
        feature_spec_fingerprint=feature_spec_fingerprint,
    )


def predict(
    model: TrainedModel, X, spec_fingerprint: str | None = None
) -> tuple[list[str], np.ndarray]:
    """Labels plus sensitive-class scores (probability, margin, or vote
    fraction depending on family)."""
    if spec_fingerprint is not None and spec_fingerprint != model.feature_spec_fingerprint:
        raise ValueError(
            "feature spec fingerprint mismatch: model was trained on "
            f"{model.feature_spec_fingerprint or '<unset>'}, vectors come from {spec_fingerprint}"
        )
    if X.shape[0] == 0:
        return [], np.zeros(0, dtype=np.float64)
    est = model.estimator
    y01 = est.predict01(X)
    if isinstance(est, (MultinomialNB, LogisticRegression)):
        scores = est.positive_proba(X)
    elif isinstance(est, LinearSVM):
        scores = est.decision_function(X)
    else:
        scores = est.positive_fraction(X)
    labels = [model.classes[int(v)] for v in y01]
    return labels, np.asarray(scores, dtype=np.float64)
