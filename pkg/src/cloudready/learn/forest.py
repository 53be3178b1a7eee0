"""Random forest: bootstrapped Gini decision trees over random feature
subsets, majority vote with the positive class winning ties.

Trees are grown until pure (or max_depth, when set). Per-tree seeds are
drawn up front from the master seed, so building trees in any order — or in
parallel — cannot change the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

__all__ = ["DecisionTree", "RandomForest"]

_PREDICT_CHUNK = 4096


@dataclass
class DecisionTree:
    """Array-encoded binary tree. feature[i] == -1 marks a leaf; rows with
    value <= threshold go left."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    leaf_class: list[int] = field(default_factory=list)

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf_class.append(-1)
        return len(self.feature) - 1

    def predict01(self, Xd: np.ndarray) -> np.ndarray:
        """Vectorized level-order descent over a dense row block."""
        n = Xd.shape[0]
        feature = np.asarray(self.feature, dtype=np.int64)
        threshold = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        leaf_class = np.asarray(self.leaf_class, dtype=np.int64)
        node = np.zeros(n, dtype=np.int64)
        while True:
            rows = np.nonzero(feature[node] >= 0)[0]
            if rows.size == 0:
                break
            cur = node[rows]
            vals = Xd[rows, feature[cur]]
            node[rows] = np.where(vals <= threshold[cur], left[cur], right[cur])
        return leaf_class[node]

    def to_params(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": [float(t) for t in self.threshold],
            "left": list(self.left),
            "right": list(self.right),
            "leaf_class": list(self.leaf_class),
        }

    @classmethod
    def from_params(cls, obj: dict) -> "DecisionTree":
        return cls(
            feature=[int(v) for v in obj["feature"]],
            threshold=[float(v) for v in obj["threshold"]],
            left=[int(v) for v in obj["left"]],
            right=[int(v) for v in obj["right"]],
            leaf_class=[int(v) for v in obj["leaf_class"]],
        )


def _best_split(values: np.ndarray, y: np.ndarray, n_pos: int):
    """Best Gini split of one feature column; None when all values equal.

    Returns (weighted_gini, threshold). Scanning split positions in sorted
    order and keeping strict improvements makes ties land on the lowest
    threshold.
    """
    n = values.shape[0]
    order = np.argsort(values, kind="stable")
    v = values[order]
    valid = v[:-1] < v[1:]
    if not valid.any():
        return None
    pos_cum = np.cumsum(y[order])[:-1].astype(np.float64)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    pl = pos_cum / nl
    pr = (n_pos - pos_cum) / nr
    weighted = (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) / n
    weighted[~valid] = np.inf
    i = int(weighted.argmin())
    return float(weighted[i]), float((v[i] + v[i + 1]) / 2.0)


class RandomForest:
    def __init__(
        self,
        n_trees: int = 10,
        max_depth: int | None = None,
        bootstrap: bool = True,
        feature_subset: str | int = "sqrt",
        seed: int = 42,
    ):
        if n_trees < 1:
            raise ValueError(f"n_trees must be >= 1, got {n_trees}")
        if max_depth is not None and max_depth < 1:
            raise ValueError(f"max_depth must be >= 1 or None, got {max_depth}")
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.feature_subset = feature_subset
        self.seed = seed
        self.trees_: list[DecisionTree] = []

    def _subset_size(self, d: int) -> int:
        if self.feature_subset == "sqrt":
            return max(1, int(math.sqrt(d)))
        if self.feature_subset == "all":
            return d
        m = int(self.feature_subset)
        if not 1 <= m <= d:
            raise ValueError(f"feature_subset {m} outside [1, {d}]")
        return m

    def _grow_tree(
        self, Xd: np.ndarray, y: np.ndarray, rng: np.random.Generator, m: int
    ) -> DecisionTree:
        n, d = Xd.shape
        tree = DecisionTree()
        root = tree._new_node()
        stack = [(root, np.arange(n, dtype=np.int64), 0)]
        while stack:
            node, idx, depth = stack.pop()
            labels = y[idx]
            n_pos = int(labels.sum())
            if n_pos == 0 or n_pos == idx.size or idx.size < 2 or (
                self.max_depth is not None and depth >= self.max_depth
            ):
                # Majority label; exact ties go to the positive class.
                tree.leaf_class[node] = 1 if 2 * n_pos >= idx.size else 0
                continue
            best = None  # (score, threshold, feature)
            candidates = rng.choice(d, size=m, replace=False)
            for f in candidates:
                found = _best_split(Xd[idx, f], labels, n_pos)
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], found[1], int(f))
            if best is None and m < d:
                # Every candidate was constant on this node; walk the rest
                # in seeded order and take the first splittable feature.
                chosen = set(int(f) for f in candidates)
                rest = np.array([f for f in range(d) if f not in chosen], dtype=np.int64)
                for f in rng.permutation(rest):
                    found = _best_split(Xd[idx, f], labels, n_pos)
                    if found is not None:
                        best = (found[0], found[1], int(f))
                        break
            if best is None:
                # Identical rows with mixed labels: unsplittable.
                tree.leaf_class[node] = 1 if 2 * n_pos >= idx.size else 0
                continue
            _, thr, f = best
            go_left = Xd[idx, f] <= thr
            tree.feature[node] = f
            tree.threshold[node] = thr
            left = tree._new_node()
            right = tree._new_node()
            tree.left[node] = left
            tree.right[node] = right
            stack.append((right, idx[~go_left], depth + 1))
            stack.append((left, idx[go_left], depth + 1))
        return tree

    def fit(self, X, y01, sample_weight=None) -> "RandomForest":
        y = np.asarray(y01, dtype=np.int64)
        n, d = X.shape
        if y.shape[0] != n:
            raise ValueError(f"X has {n} rows but y has {y.shape[0]} labels")
        Xd = np.asarray(X.todense()) if sparse.issparse(X) else np.asarray(X, dtype=np.float64)
        m = self._subset_size(d)
        if sample_weight is not None:
            p = np.asarray(sample_weight, dtype=np.float64)
            p = p / p.sum()
        else:
            p = None

        master = np.random.default_rng(self.seed)
        tree_seeds = master.integers(0, 2**63 - 1, size=self.n_trees)
        self.trees_ = []
        for ts in tree_seeds:
            rng = np.random.default_rng(int(ts))
            if self.bootstrap:
                idx = rng.choice(n, size=n, replace=True, p=p)
                self.trees_.append(self._grow_tree(Xd[idx], y[idx], rng, m))
            else:
                self.trees_.append(self._grow_tree(Xd, y, rng, m))
        return self

    def positive_fraction(self, X) -> np.ndarray:
        """Fraction of trees voting the positive class, per row."""
        n = X.shape[0]
        votes = np.zeros(n, dtype=np.float64)
        for start in range(0, n, _PREDICT_CHUNK):
            stop = min(start + _PREDICT_CHUNK, n)
            block = X[start:stop]
            Xd = np.asarray(block.todense()) if sparse.issparse(block) else np.asarray(
                block, dtype=np.float64
            )
            if Xd.ndim == 1:
                Xd = Xd.reshape(1, -1)
            for tree in self.trees_:
                votes[start:stop] += tree.predict01(Xd)
        return votes / self.n_trees

    def predict01(self, X) -> np.ndarray:
        """Majority vote; an exact tie (e.g. 5 of 10 trees) predicts positive."""
        return (self.positive_fraction(X) >= 0.5).astype(np.int64)
