"""Stratified k-fold cross-validation and C grid search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .metrics import Metrics, evaluate
from .training import TrainConfig, predict, train

__all__ = [
    "CVResult",
    "GridSearchResult",
    "stratified_kfold",
    "cross_validate",
    "grid_search",
]


@dataclass(frozen=True)
class CVResult:
    folds: tuple[Metrics, ...]
    mean_accuracy: float
    mean_precision: float
    mean_recall: float
    mean_f1: float


@dataclass(frozen=True)
class GridSearchResult:
    best_C: float
    table: tuple[tuple[float, float], ...]  # (C, mean CV accuracy), C ascending


def stratified_kfold(
    labels: Sequence[str], k: int, seed: int = 42
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded stratified folds: each class is shuffled once and dealt
    round-robin, so every fold holds roughly class-proportional counts.

    Returns [(train_indices, test_indices)] with sorted index arrays.
    """
    labs = list(labels)
    n = len(labs)
    if k < 2:
        raise ValueError(f"folds must be >= 2, got {k}")
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labs):
        by_class.setdefault(lab, []).append(i)
    smallest = min(len(idx) for idx in by_class.values())
    if k > smallest:
        raise ValueError(
            f"{k} folds infeasible: smallest class has only {smallest} samples"
        )
    rng = np.random.default_rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(k)]
    for lab in sorted(by_class):
        idx = np.array(by_class[lab], dtype=np.int64)
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            fold_members[pos % k].append(int(i))
    folds = []
    all_idx = set(range(n))
    for members in fold_members:
        test = np.array(sorted(members), dtype=np.int64)
        training = np.array(sorted(all_idx.difference(members)), dtype=np.int64)
        folds.append((training, test))
    return folds


def cross_validate(X, labels: Sequence[str], config: TrainConfig) -> CVResult:
    """Unweighted mean of per-fold metrics over stratified folds."""
    labs = list(labels)
    folds = stratified_kfold(labs, config.folds, seed=config.seed)
    fold_metrics: list[Metrics] = []
    for train_idx, test_idx in folds:
        model = train(X[train_idx], [labs[i] for i in train_idx], config)
        predicted, _ = predict(model, X[test_idx])
        fold_metrics.append(evaluate(predicted, [labs[i] for i in test_idx]))
    k = len(fold_metrics)
    return CVResult(
        folds=tuple(fold_metrics),
        mean_accuracy=sum(m.accuracy for m in fold_metrics) / k,
        mean_precision=sum(m.precision for m in fold_metrics) / k,
        mean_recall=sum(m.recall for m in fold_metrics) / k,
        mean_f1=sum(m.f1 for m in fold_metrics) / k,
    )


def grid_search(
    X,
    labels: Sequence[str],
    family: str,
    C_grid: Sequence[float],
    folds: int = 10,
    seed: int = 42,
    class_weight: str = "none",
) -> GridSearchResult:
    """Best C by mean CV accuracy; ties go to the smaller C.

    The grid is deduplicated and scanned ascending.
    """
    if not C_grid:
        raise ValueError("C grid is empty")
    grid = sorted(set(float(c) for c in C_grid))
    best_C = None
    best_acc = -1.0
    table = []
    for c in grid:
        config = TrainConfig(family=family, C=c, folds=folds, seed=seed, class_weight=class_weight)
        result = cross_validate(X, labels, config)
        table.append((c, result.mean_accuracy))
        if result.mean_accuracy > best_acc:
            best_acc = result.mean_accuracy
            best_C = c
    return GridSearchResult(best_C=best_C, table=tuple(table))
