"""K-means, representative selection, and elbow heuristic against exact
small-case oracles (exhaustive partition enumeration where feasible)."""

from __future__ import annotations

import math
from types import SimpleNamespace

import numpy as np
import pytest
from scipy import sparse

from cloudready.cluster import (
    ClusterAssignment,
    ElbowResult,
    elbow,
    kmeans,
    objective_of,
    representative,
    volume_points,
)

from conftest import exhaustive_best_objective


class TestKmeans:
    def test_two_obvious_groups(self):
        points = [[0.0], [1.0], [10.0], [11.0]]
        result = kmeans(points, k=2, seed=1, restarts=10)
        assert result.objective == pytest.approx(1.0, abs=1e-12)
        assert sorted(c[0] for c in result.centroids) == pytest.approx([0.5, 10.5])
        # the split puts the two low points together and the two high apart
        a = result.assignments
        assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]
        assert result.converged

    def test_k_equals_n_gives_zero_objective(self):
        points = [[0.0, 0.0], [3.0, 1.0], [7.0, 2.0]]
        result = kmeans(points, k=3, seed=3)
        assert result.objective == 0.0
        assert sorted(result.assignments.tolist()) == [0, 1, 2]

    def test_k_equals_one_centroid_is_mean(self):
        points = np.array([[2.0, 0.0], [4.0, 2.0], [6.0, 4.0]])
        result = kmeans(points, k=1, seed=0)
        assert result.centroids[0] == pytest.approx([4.0, 2.0])
        assert result.objective == pytest.approx(objective_of(points, [0, 0, 0]))

    @pytest.mark.parametrize(
        "n,k,seed",
        [(6, 2, 0), (7, 3, 1), (8, 2, 2), (8, 3, 3)],
    )
    def test_matches_exhaustive_partition_optimum(self, n, k, seed):
        rng = np.random.default_rng(seed)
        points = rng.integers(0, 12, size=(n, 2)).astype(float)
        best = exhaustive_best_objective(points, k)
        result = kmeans(points, k=k, seed=42, restarts=20)
        assert result.objective == pytest.approx(best, abs=1e-9)
        assert result.objective >= best - 1e-9  # never better than the optimum

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(8)
        points = rng.normal(size=(40, 3))
        a = kmeans(points, k=4, seed=17)
        b = kmeans(points, k=4, seed=17)
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.objective == b.objective

    def test_more_restarts_never_worse(self):
        rng = np.random.default_rng(2)
        points = rng.normal(size=(30, 2))
        one = kmeans(points, k=5, seed=9, restarts=1)
        many = kmeans(points, k=5, seed=9, restarts=8)
        assert many.objective <= one.objective + 1e-12

    def test_sparse_and_dense_agree(self):
        rng = np.random.default_rng(4)
        dense = rng.random((25, 6))
        dense[dense < 0.5] = 0.0
        a = kmeans(dense, k=3, seed=5)
        b = kmeans(sparse.csr_matrix(dense), k=3, seed=5)
        assert np.array_equal(a.assignments, b.assignments)
        assert a.objective == pytest.approx(b.objective, abs=1e-9)

    def test_one_dimensional_input_reshaped(self):
        result = kmeans([0.0, 1.0, 10.0, 11.0], k=2, seed=1)
        assert result.centroids.shape == (2, 1)

    def test_duplicate_points_handled(self):
        points = [[1.0], [1.0], [1.0], [9.0]]
        result = kmeans(points, k=2, seed=0, restarts=5)
        assert result.objective == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            (dict(k=0), "k must be"),
            (dict(k=5), "k must be"),
            (dict(k=2, max_iter=0), "max_iter"),
            (dict(k=2, restarts=0), "restarts"),
        ],
    )
    def test_parameter_validation(self, kwargs, match):
        points = [[0.0], [1.0], [2.0]]
        with pytest.raises(ValueError, match=match):
            kmeans(points, **kwargs)

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="at least one point"):
            kmeans(np.empty((0, 2)), k=1)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="non-finite"):
            kmeans([[0.0], [float("nan")]], k=1)


class TestObjectiveOf:
    def test_hand_computed_value(self):
        points = [[0.0], [1.0], [10.0], [11.0]]
        assert objective_of(points, [0, 0, 1, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_single_cluster_is_total_variance_sum(self):
        points = np.array([[1.0], [3.0], [5.0]])
        assert objective_of(points, [0, 0, 0]) == pytest.approx(8.0)

    def test_empty_assignment_is_zero(self):
        assert objective_of(np.empty((0, 2)), []) == 0.0

    def test_unused_cluster_ids_ignored(self):
        points = [[0.0], [4.0]]
        assert objective_of(points, [0, 2], k=3) == 0.0


class TestRepresentative:
    def test_median_like_member_wins(self):
        # distance totals: point0 -> 6, point1 -> 5, point2 -> 9
        points = [[0.0], [1.0], [5.0]]
        assert representative(points, [0, 0, 0], 0) == 1

    def test_tie_goes_to_lowest_index(self):
        points = [[2.0], [2.0], [7.0]]
        assert representative(points, [0, 0, 0], 0) == 0

    def test_only_cluster_members_considered(self):
        points = [[0.0], [100.0], [1.0], [2.0]]
        assert representative(points, [0, 1, 0, 0], 0) == 2

    def test_singleton_cluster(self):
        points = [[3.0], [8.0]]
        assert representative(points, [0, 1], 1) == 1

    def test_empty_cluster_rejected(self):
        with pytest.raises(ValueError, match="no members"):
            representative([[0.0], [1.0]], [0, 0], 1)


class TestElbow:
    @pytest.fixture()
    def three_blobs(self):
        rng = np.random.default_rng(13)
        centers = np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]])
        return np.vstack([c + rng.normal(scale=0.4, size=(15, 2)) for c in centers])

    def test_suggests_true_blob_count(self, three_blobs):
        result = elbow(three_blobs, range(1, 7), seed=3, restarts=10)
        assert isinstance(result, ElbowResult)
        assert result.suggested_k == 3
        assert result.ks == (1, 2, 3, 4, 5, 6)

    def test_explained_starts_at_zero_and_rises(self, three_blobs):
        result = elbow(three_blobs, range(1, 7), seed=3, restarts=10)
        assert result.explained[0] == 0.0
        assert result.explained[result.ks.index(3)] > 0.99
        assert all(0.0 <= e <= 1.0 for e in result.explained)

    def test_objectives_track_kmeans(self, three_blobs):
        result = elbow(three_blobs, range(1, 5), seed=7, restarts=5)
        for k, obj in zip(result.ks, result.objectives):
            assert obj == kmeans(three_blobs, k, seed=7, restarts=5).objective

    def test_range_must_have_three_values(self):
        with pytest.raises(ValueError, match="at least 3"):
            elbow(np.random.default_rng(0).random((10, 2)), [2, 3])

    def test_range_must_be_consecutive(self):
        with pytest.raises(ValueError, match="consecutive"):
            elbow(np.random.default_rng(0).random((10, 2)), [1, 3, 5])

    def test_range_must_fit_point_count(self):
        with pytest.raises(ValueError, match=r"within \[1"):
            elbow(np.random.default_rng(0).random((4, 2)), [3, 4, 5])


class TestVolumePoints:
    @staticmethod
    def profile(volume_id, count, size, fill):
        return SimpleNamespace(
            volume_id=volume_id,
            pct_not_modified_1y_count=fill,
            pct_not_modified_1y_size=fill,
            pct_not_modified_3y_count=fill,
            pct_not_modified_3y_size=fill,
            pct_not_accessed_1y_count=fill,
            pct_not_accessed_1y_size=fill,
            pct_not_accessed_3y_count=fill,
            pct_not_accessed_3y_size=fill,
            pct_not_accessed_after_2w_count=fill,
            pct_not_accessed_after_2w_size=fill,
            total_file_count=count,
            total_size=size,
        )

    def test_shape_ids_and_range(self):
        profiles = [
            self.profile("vol01", 1000, 10**12, 80.0),
            self.profile("vol02", 100, 10**9, 20.0),
            self.profile("vol03", 10, 10**6, 50.0),
        ]
        ids, matrix = volume_points(profiles)
        assert ids == ["vol01", "vol02", "vol03"]
        assert matrix.shape == (3, 12)
        assert matrix.min() >= 0.0 and matrix.max() <= 1.0

    def test_normalization_endpoints(self):
        profiles = [
            self.profile("a", 10, 10**6, 0.0),
            self.profile("b", 1000, 10**12, 100.0),
        ]
        _, matrix = volume_points(profiles)
        assert matrix[0] == pytest.approx(np.zeros(12))
        assert matrix[1] == pytest.approx(np.ones(12))

    def test_constant_columns_become_zero(self):
        profiles = [
            self.profile("a", 500, 10**9, 33.0),
            self.profile("b", 500, 10**9, 33.0),
        ]
        _, matrix = volume_points(profiles)
        assert np.all(matrix == 0.0)

    def test_counts_enter_logarithmically(self):
        profiles = [
            self.profile("a", 1, 1, 0.0),
            self.profile("b", 100, 1, 0.0),
            self.profile("c", 10000, 1, 0.0),
        ]
        _, matrix = volume_points(profiles)
        # log10 counts 0, 2, 4 -> normalized 0, 0.5, 1
        assert matrix[:, 10] == pytest.approx([0.0, 0.5, 1.0])
