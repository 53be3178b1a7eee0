"""Model persistence: one versioned JSON document per trained model.

Serialization is canonical (sorted keys, repr-exact floats) so identical
training runs produce byte-identical model files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .bayes import MultinomialNB
from .forest import DecisionTree, RandomForest
from .linear import LinearSVM, LogisticRegression
from .training import TrainedModel

__all__ = ["ModelFormatError", "model_to_json", "model_from_json", "save_model", "load_model"]

MODEL_FORMAT = "sensitivity-model"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _params_of(est) -> dict:
    if isinstance(est, MultinomialNB):
        return {
            "alpha": est.alpha,
            "class_log_prior": est.class_log_prior_.tolist(),
            "feature_log_prob": est.feature_log_prob_.tolist(),
        }
    if isinstance(est, LogisticRegression):
        return {
            "C": est.C,
            "max_iter": est.max_iter,
            "gtol": est.gtol,
            "ftol": est.ftol,
            "coef": est.coef_.tolist(),
            "intercept": est.intercept_,
            "n_iter": est.n_iter_,
            "converged": est.converged_,
        }
    if isinstance(est, LinearSVM):
        return {
            "C": est.C,
            "epochs": est.epochs,
            "seed": est.seed,
            "coef": est.coef_.tolist(),
            "intercept": est.intercept_,
        }
    if isinstance(est, RandomForest):
        return {
            "n_trees": est.n_trees,
            "max_depth": est.max_depth,
            "bootstrap": est.bootstrap,
            "feature_subset": est.feature_subset,
            "seed": est.seed,
            "trees": [t.to_params() for t in est.trees_],
        }
    raise ModelFormatError(f"unknown estimator type {type(est).__name__}")


def _estimator_from(family: str, params: dict):
    if family == "MultinomialNB":
        est = MultinomialNB(alpha=float(params["alpha"]))
        est.class_log_prior_ = np.asarray(params["class_log_prior"], dtype=np.float64)
        est.feature_log_prob_ = np.asarray(params["feature_log_prob"], dtype=np.float64)
        return est
    if family == "LogisticRegression":
        est = LogisticRegression(
            C=float(params["C"]),
            max_iter=int(params["max_iter"]),
            gtol=float(params["gtol"]),
            ftol=float(params["ftol"]),
        )
        est.coef_ = np.asarray(params["coef"], dtype=np.float64)
        est.intercept_ = float(params["intercept"])
        est.n_iter_ = int(params["n_iter"])
        est.converged_ = bool(params["converged"])
        return est
    if family == "LinearSVM":
        est = LinearSVM(
            C=float(params["C"]), epochs=int(params["epochs"]), seed=int(params["seed"])
        )
        est.coef_ = np.asarray(params["coef"], dtype=np.float64)
        est.intercept_ = float(params["intercept"])
        return est
    if family == "RandomForest":
        max_depth = params["max_depth"]
        subset = params["feature_subset"]
        est = RandomForest(
            n_trees=int(params["n_trees"]),
            max_depth=None if max_depth is None else int(max_depth),
            bootstrap=bool(params["bootstrap"]),
            feature_subset=subset if subset in ("sqrt", "all") else int(subset),
            seed=int(params["seed"]),
        )
        est.trees_ = [DecisionTree.from_params(t) for t in params["trees"]]
        return est
    raise ModelFormatError(f"unknown model family {family!r}")


def model_to_json(model: TrainedModel) -> str:
    obj = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "family": model.family,
        "classes": list(model.classes),
        "feature_spec_fingerprint": model.feature_spec_fingerprint,
        "params": _params_of(model.estimator),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2)


def model_from_json(text: str) -> TrainedModel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"not valid JSON: {exc}") from exc
    if obj.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a model document: format={obj.get('format')!r}")
    if obj.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {obj.get('version')!r}")
    classes = obj["classes"]
    if len(classes) != 2:
        raise ModelFormatError(f"expected 2 classes, got {classes}")
    return TrainedModel(
        family=obj["family"],
        classes=(str(classes[0]), str(classes[1])),
        estimator=_estimator_from(obj["family"], obj["params"]),
        feature_spec_fingerprint=str(obj.get("feature_spec_fingerprint", "")),
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
