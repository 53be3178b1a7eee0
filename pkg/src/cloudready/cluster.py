"""K-means clustering with k-means++ seeding, plus representative selection
and the elbow heuristic.

Used twice in the pipeline: on volume profile vectors (small, dense) and on
file metadata vectors (large, sparse, vocabulary-capped) to stratify the
progressive sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

__all__ = [
    "ClusterAssignment",
    "ElbowResult",
    "kmeans",
    "objective_of",
    "representative",
    "elbow",
    "volume_points",
]

DEFAULT_SEED = 42
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 300


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    assignments: np.ndarray  # point index -> cluster id in [0, k)
    centroids: np.ndarray  # (k, dim), each the mean of its members
    objective: float  # sum of squared distances to assigned centroids
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ElbowResult:
    suggested_k: int
    ks: tuple[int, ...]
    objectives: tuple[float, ...]
    explained: tuple[float, ...]  # 1 - objective(k)/objective(1)
    # ks whose explained variance dropped below the previous k's — possible
    # with a heuristic solver, reported rather than asserted away.
    violations: tuple[int, ...]


def _as_matrix(points):
    if sparse.issparse(points):
        return sparse.csr_matrix(points)
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return X


def _row_sq_norms(X) -> np.ndarray:
    if sparse.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).ravel()
    return (X * X).sum(axis=1)


def _sq_dists(X, x_sq: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, k) squared Euclidean distances; expanded form, clipped at 0."""
    cross = X @ centers.T
    if sparse.issparse(cross):
        cross = np.asarray(cross.todense())
    d2 = x_sq[:, None] - 2.0 * cross + (centers * centers).sum(axis=1)[None, :]
    np.maximum(d2, 0.0, out=d2)
    return d2


def _row_dense(X, idx) -> np.ndarray:
    rows = X[idx]
    if sparse.issparse(rows):
        return np.asarray(rows.todense())
    return np.atleast_2d(rows)


def _kmeanspp(X, x_sq: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n, dim = X.shape
    centers = np.empty((k, dim), dtype=np.float64)
    first = int(rng.integers(n))
    centers[0] = _row_dense(X, [first])[0]
    if k == 1:
        return centers
    d2 = _sq_dists(X, x_sq, centers[:1])[:, 0]
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))  # all remaining points coincide
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = _row_dense(X, [idx])[0]
        d2 = np.minimum(d2, _sq_dists(X, x_sq, centers[c : c + 1])[:, 0])
    return centers


def objective_of(points, assignments: Sequence[int], k: int | None = None) -> float:
    """Σ over clusters of Σ ||x − mean(cluster)||², accumulated in cluster
    index order. Both the solver and any exhaustive check should score
    through this one function so equal assignments score bit-identically."""
    X = _as_matrix(points)
    a = np.asarray(assignments, dtype=np.int64)
    if k is None:
        k = int(a.max()) + 1 if a.size else 0
    total = 0.0
    for c in range(k):
        idx = np.nonzero(a == c)[0]
        if idx.size == 0:
            continue
        members = _row_dense(X, idx)
        mu = members.mean(axis=0)
        diff = members - mu
        total += float((diff * diff).sum())
    return total


def _lloyd(X, x_sq: np.ndarray, centers: np.ndarray, max_iter: int):
    n = X.shape[0]
    k = centers.shape[0]
    assign = np.full(n, -1, dtype=np.int64)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        d2 = _sq_dists(X, x_sq, centers)
        new_assign = d2.argmin(axis=1)
        # Repair empty clusters: hand each one the farthest point whose own
        # cluster keeps at least one member, lowest cluster id first. Taking
        # only from multi-member clusters means a donation can never empty
        # the donor, so every cluster ends the iteration with a centroid.
        counts = np.bincount(new_assign, minlength=k)
        while (counts == 0).any():
            own = d2[np.arange(n), new_assign]
            movable = counts[new_assign] > 1
            far = int(np.where(movable, own, -np.inf).argmax())
            empty = int(np.nonzero(counts == 0)[0][0])
            counts[new_assign[far]] -= 1
            new_assign[far] = empty
            counts[empty] += 1
        for c in range(k):
            members = _row_dense(X, np.nonzero(new_assign == c)[0])
            centers[c] = members.mean(axis=0)
        if np.array_equal(new_assign, assign):
            converged = True
            assign = new_assign
            break
        assign = new_assign
    return assign, centers, iterations, converged


def kmeans(
    points,
    k: int,
    seed: int = DEFAULT_SEED,
    max_iter: int = DEFAULT_MAX_ITER,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusterAssignment:
    """Best of ``restarts`` Lloyd runs from k-means++ seeds.

    Deterministic given (points, k, seed): restarts consume one sequential
    random stream, so restarts=1 reproduces the first run of restarts=5.
    """
    X = _as_matrix(points)
    n = X.shape[0]
    if n < 1:
        raise ValueError("kmeans needs at least one point")
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    data = X.data if sparse.issparse(X) else X
    if not np.isfinite(data).all():
        raise ValueError("points contain non-finite coordinates")

    x_sq = _row_sq_norms(X)
    rng = np.random.default_rng(seed)
    best: ClusterAssignment | None = None
    for _ in range(restarts):
        centers = _kmeanspp(X, x_sq, k, rng)
        assign, centers, iterations, converged = _lloyd(X, x_sq, centers, max_iter)
        obj = objective_of(X, assign, k)
        if best is None or obj < best.objective:
            best = ClusterAssignment(
                k=k,
                assignments=assign,
                centroids=centers.copy(),
                objective=obj,
                iterations=iterations,
                converged=converged,
            )
    return best


def representative(points, assignments: Sequence[int], cluster_id: int) -> int:
    """Member minimizing total Euclidean distance to its co-members.

    Ties go to the lowest point index. Raises on an empty cluster.
    """
    X = _as_matrix(points)
    a = np.asarray(assignments, dtype=np.int64)
    idx = np.nonzero(a == cluster_id)[0]
    if idx.size == 0:
        raise ValueError(f"cluster {cluster_id} has no members")
    members = _row_dense(X, idx)
    sq = (members * members).sum(axis=1)
    d2 = sq[:, None] - 2.0 * (members @ members.T) + sq[None, :]
    np.maximum(d2, 0.0, out=d2)
    totals = np.sqrt(d2).sum(axis=1)
    return int(idx[int(totals.argmin())])


def elbow(
    points,
    k_range: Sequence[int],
    seed: int = DEFAULT_SEED,
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ElbowResult:
    """Variance-explained curve over k, with the maximum-curvature-drop k.

    explained(k) = 1 − objective(k)/objective(1). The suggestion maximizes
    (explained(k)−explained(k−1)) − (explained(k+1)−explained(k)) over
    interior k, so the range needs at least 3 consecutive values.
    """
    ks = list(k_range)
    X = _as_matrix(points)
    n = X.shape[0]
    if len(ks) < 3:
        raise ValueError("k_range needs at least 3 values to locate an elbow")
    if any(ks[i + 1] - ks[i] != 1 for i in range(len(ks) - 1)):
        raise ValueError("k_range must be consecutive ascending integers")
    if ks[0] < 1 or ks[-1] > n:
        raise ValueError(f"k_range must lie within [1, {n}]")

    objectives = []
    for k in ks:
        objectives.append(kmeans(X, k, seed=seed, max_iter=max_iter, restarts=restarts).objective)
    obj1 = objectives[0] if ks[0] == 1 else objective_of(X, np.zeros(n, dtype=np.int64), 1)
    if obj1 > 0.0:
        explained = [1.0 - obj / obj1 for obj in objectives]
    else:
        explained = [0.0 for _ in objectives]

    violations = tuple(
        ks[i] for i in range(1, len(ks)) if explained[i] < explained[i - 1]
    )
    best_i = None
    best_drop = -math.inf
    for i in range(1, len(ks) - 1):
        drop = (explained[i] - explained[i - 1]) - (explained[i + 1] - explained[i])
        if drop > best_drop:
            best_drop = drop
            best_i = i
    return ElbowResult(
        suggested_k=ks[best_i],
        ks=tuple(ks),
        objectives=tuple(objectives),
        explained=tuple(explained),
        violations=violations,
    )


def volume_points(profiles: Sequence) -> tuple[list[str], np.ndarray]:
    """Volume clustering inputs: the profile percentages plus log10 of file
    count and of total size, min-max normalized per column.

    Accepts any sequence of VolumeProfile-shaped records.
    """
    ids = [p.volume_id for p in profiles]
    raw = np.array(
        [
            [
                p.pct_not_modified_1y_count,
                p.pct_not_modified_1y_size,
                p.pct_not_modified_3y_count,
                p.pct_not_modified_3y_size,
                p.pct_not_accessed_1y_count,
                p.pct_not_accessed_1y_size,
                p.pct_not_accessed_3y_count,
                p.pct_not_accessed_3y_size,
                p.pct_not_accessed_after_2w_count,
                p.pct_not_accessed_after_2w_size,
                math.log10(max(p.total_file_count, 1)),
                math.log10(max(p.total_size, 1)),
            ]
            for p in profiles
        ],
        dtype=np.float64,
    )
    mins = raw.min(axis=0)
    maxs = raw.max(axis=0)
    span = maxs - mins
    span[span == 0.0] = 1.0  # constant columns normalize to 0
    return ids, (raw - mins) / span
