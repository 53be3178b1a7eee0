"""Mutual-information feature ranking.

Plug-in MI on discrete contingency tables, in nats. Columns with at most
two distinct values use those values as natural bins; anything else is
equal-width binned. Ranking is reporting/analysis by default; training is
not restricted to top features unless a caller does so explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .features import FeatureSpec

__all__ = [
    "FeatureScore",
    "mutual_information",
    "top_k",
    "category_histogram",
    "feature_names",
    "feature_categories",
    "NUMERIC_FEATURE_NAMES",
]

DEFAULT_BINS = 10

# Order matches the numeric block layout in features.encode.
NUMERIC_FEATURE_NAMES = (
    "file_size",
    "bytes_used",
    "days_created_to_accessed",
    "days_created_to_changed",
    "days_created_to_modified",
)
_NUMERIC_CATEGORIES = (
    "SizeRelated",
    "SizeRelated",
    "TimeRelated",
    "TimeRelated",
    "TimeRelated",
)


@dataclass(frozen=True)
class FeatureScore:
    index: int
    name: str
    category: str  # Text | Path | Extension | SizeRelated | TimeRelated
    mi: float


def _bin_column(column: np.ndarray, bins: int) -> tuple[np.ndarray, int]:
    """Discretize one column; returns (codes, number of bins used)."""
    distinct = np.unique(column)
    if distinct.size <= 2:
        return np.searchsorted(distinct, column), max(distinct.size, 1)
    mn = float(distinct[0])
    mx = float(distinct[-1])
    codes = ((column - mn) / (mx - mn) * bins).astype(np.int64)
    np.clip(codes, 0, bins - 1, out=codes)
    return codes, bins


def _mi_from_counts(table: np.ndarray) -> float:
    """Σ p(x,y) ln(p(x,y) / (p(x) p(y))) over nonzero cells."""
    n = table.sum()
    if n == 0:
        return 0.0
    px = table.sum(axis=1) / n
    py = table.sum(axis=0) / n
    mi = 0.0
    for i in range(table.shape[0]):
        for j in range(table.shape[1]):
            c = table[i, j]
            if c == 0:
                continue
            pxy = c / n
            mi += pxy * math.log(pxy / (px[i] * py[j]))
    # Clamp the tiny negative residue float summation can leave.
    return max(mi, 0.0)


def mutual_information(
    column: Sequence[float] | np.ndarray,
    labels: Sequence,
    bins: int = DEFAULT_BINS,
) -> float:
    """MI (nats) between one discretized feature column and labels.

    Constant labels give 0 by convention. Requires length >= 2.
    """
    col = np.asarray(column, dtype=np.float64)
    labs = np.asarray(labels)
    if col.ndim != 1 or labs.ndim != 1 or col.shape[0] != labs.shape[0]:
        raise ValueError("column and labels must be 1-D and the same length")
    if col.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    classes, y = np.unique(labs, return_inverse=True)
    if classes.size < 2:
        return 0.0
    x, nx = _bin_column(col, bins)
    table = np.zeros((nx, classes.size), dtype=np.int64)
    np.add.at(table, (x, y), 1)
    return _mi_from_counts(table)


def _column_mi_sparse(
    matrix: sparse.csc_matrix, j: int, y: np.ndarray, n_classes: int, bins: int
) -> float:
    """MI of column j without densifying when the column is 0/v-valued."""
    start, end = matrix.indptr[j], matrix.indptr[j + 1]
    data = matrix.data[start:end]
    rows = matrix.indices[start:end]
    n = matrix.shape[0]
    if data.size == 0:
        return 0.0  # all-zero column is independent of anything
    distinct = np.unique(data)
    if distinct.size == 1 and data.size < n:
        # Two-valued column {0, v}: contingency from label counts alone.
        total_per_class = np.bincount(y, minlength=n_classes)
        nz_per_class = np.bincount(y[rows], minlength=n_classes)
        table = np.stack([total_per_class - nz_per_class, nz_per_class])
        return _mi_from_counts(table)
    col = np.zeros(n, dtype=np.float64)
    col[rows] = data
    x, nx = _bin_column(col, bins)
    table = np.zeros((nx, n_classes), dtype=np.int64)
    np.add.at(table, (x, y), 1)
    return _mi_from_counts(table)


def feature_names(spec: FeatureSpec) -> list[str]:
    """Human-readable name of every feature position."""
    return (
        list(spec.vocabulary)
        + list(spec.folder_list)
        + list(spec.extension_list)
        + list(NUMERIC_FEATURE_NAMES)
    )


def feature_categories(spec: FeatureSpec) -> list[str]:
    return (
        ["Text"] * len(spec.vocabulary)
        + ["Path"] * len(spec.folder_list)
        + ["Extension"] * len(spec.extension_list)
        + list(_NUMERIC_CATEGORIES)
    )


def top_k(
    matrix,
    labels: Sequence,
    k: int,
    spec: FeatureSpec | None = None,
    bins: int = DEFAULT_BINS,
) -> list[FeatureScore]:
    """Rank features by MI, descending; ties broken by index ascending.

    With a FeatureSpec the scores carry block-aware names and categories;
    without one they fall back to positional names.
    """
    labs = np.asarray(labels)
    n_features = matrix.shape[1]
    if k > n_features:
        raise ValueError(f"k={k} exceeds feature count {n_features}")
    classes, y = np.unique(labs, return_inverse=True)
    if spec is not None and spec.total_length != n_features:
        raise ValueError(
            f"feature spec length {spec.total_length} != matrix width {n_features}"
        )

    scores = np.zeros(n_features, dtype=np.float64)
    if classes.size >= 2:
        if sparse.issparse(matrix):
            csc = sparse.csc_matrix(matrix)
            for j in range(n_features):
                scores[j] = _column_mi_sparse(csc, j, y, classes.size, bins)
        else:
            dense = np.asarray(matrix, dtype=np.float64)
            for j in range(n_features):
                scores[j] = mutual_information(dense[:, j], labs, bins)

    names = feature_names(spec) if spec is not None else [f"f{i}" for i in range(n_features)]
    cats = feature_categories(spec) if spec is not None else [""] * n_features
    # Sort by (-mi, index): descending score, index-ascending ties.
    order = sorted(range(n_features), key=lambda i: (-scores[i], i))
    return [FeatureScore(index=i, name=names[i], category=cats[i], mi=float(scores[i])) for i in order[:k]]


def category_histogram(scores: Sequence[FeatureScore]) -> dict[str, int]:
    """Count of ranked features per category (partition of the input)."""
    hist: dict[str, int] = {}
    for s in scores:
        hist[s.category] = hist.get(s.category, 0) + 1
    return hist
