"""Clustering-based progressive sampling.

Files are drawn cluster-proportionally, content-scanned and labeled, and
the sample grows round by round until model accuracy stops improving, the
sampling budget is hit, or the corpus runs out. Draws are per-cluster
permutation prefixes, so a larger fraction always extends — never reshuffles
— an earlier sample, and no file is content-scanned twice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dictionary import SensitivityLabel
from .scan import FileMeta

__all__ = [
    "SamplingConfig",
    "SamplingRound",
    "ProgressiveResult",
    "proportional_sample",
    "progressive_sample",
]


@dataclass(frozen=True)
class SamplingConfig:
    initial_fraction: float = 0.01
    increment_fraction: float = 0.01
    accuracy_delta_threshold: float = 0.005
    max_fraction: float = 0.10
    file_cluster_k: int = 8
    cluster_vocab_cap: int = 500
    seed: int = 42
    eval_folds: int = 5  # k-fold CV on the cumulative labeled sample

    def __post_init__(self):
        if not 0.0 < self.initial_fraction <= self.max_fraction <= 1.0:
            raise ValueError(
                "need 0 < initial_fraction <= max_fraction <= 1, got "
                f"initial={self.initial_fraction}, max={self.max_fraction}"
            )
        if self.increment_fraction <= 0.0:
            raise ValueError(f"increment_fraction must be > 0, got {self.increment_fraction}")
        if self.accuracy_delta_threshold < 0.0:
            raise ValueError(
                f"accuracy_delta_threshold must be >= 0, got {self.accuracy_delta_threshold}"
            )
        if self.file_cluster_k < 1:
            raise ValueError(f"file_cluster_k must be >= 1, got {self.file_cluster_k}")
        if self.eval_folds < 2:
            raise ValueError(f"eval_folds must be >= 2, got {self.eval_folds}")


@dataclass(frozen=True)
class SamplingRound:
    index: int
    cumulative_ids: tuple[int, ...]  # corpus indices, sorted
    sensitive: int
    non_sensitive: int
    unknown: int
    accuracy: float
    stopped: bool
    reason: str  # converged | budget | exhausted, empty while running


@dataclass
class ProgressiveResult:
    training_indices: list[int]  # corpus indices with a binary label
    training_labels: list[str]
    scanned: dict[int, SensitivityLabel] = field(default_factory=dict)
    rounds: list[SamplingRound] = field(default_factory=list)

    @property
    def stop_reason(self) -> str:
        return self.rounds[-1].reason if self.rounds else ""


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def proportional_sample(
    cluster_sizes: Sequence[int],
    total_n: int,
    fraction: float,
    seed: int,
) -> tuple[list[int], list[np.ndarray]]:
    """Cluster-proportional draw: counts plus within-cluster sample indices.

    Per-cluster count = round-half-up(size_c * fraction); the rounding
    residual against round-half-up(total_n * fraction) lands on the largest
    cluster; every count is then capped at its cluster size. Draws are
    prefixes of one seeded permutation per cluster, so the same seed with a
    larger fraction yields a superset.
    """
    sizes = [int(s) for s in cluster_sizes]
    if any(s < 0 for s in sizes):
        raise ValueError("cluster sizes must be nonnegative")
    if sum(sizes) != total_n:
        raise ValueError(f"cluster sizes sum to {sum(sizes)}, expected total_n={total_n}")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")

    counts = [_round_half_up(s * fraction) for s in sizes]
    target_total = _round_half_up(total_n * fraction)
    residual = target_total - sum(counts)
    if residual != 0 and sizes:
        largest = max(range(len(sizes)), key=lambda c: (sizes[c], -c))
        counts[largest] = max(counts[largest] + residual, 0)
    counts = [min(c, s) for c, s in zip(counts, sizes)]

    rng = np.random.default_rng(seed)
    drawn = []
    for size, count in zip(sizes, counts):
        perm = rng.permutation(size)
        drawn.append(np.sort(perm[:count]))
    return counts, drawn


def progressive_sample(
    files: Sequence[FileMeta],
    config: SamplingConfig,
    label_fn: Callable[[FileMeta], SensitivityLabel],
    trainer_fn: Callable[[list[int], list[str]], float],
    cluster_assignments: Sequence[int] | None = None,
) -> ProgressiveResult:
    """Grow a labeled sample until accuracy converges or budget runs out.

    ``label_fn`` content-scans one file (called exactly once per sampled
    file). ``trainer_fn`` receives the cumulative binary-labeled corpus
    indices and their labels and returns an accuracy; the previous round's
    accuracy starts at 0, and the loop stops when the round-over-round
    change is within the threshold ("converged"), the cumulative fraction
    reaches max_fraction ("budget"), or every file has been drawn
    ("exhausted").
    """
    n = len(files)
    if n == 0:
        raise ValueError("corpus is empty")
    if cluster_assignments is None:
        assignments = np.zeros(n, dtype=np.int64)
    else:
        assignments = np.asarray(cluster_assignments, dtype=np.int64)
        if assignments.shape[0] != n:
            raise ValueError(
                f"{assignments.shape[0]} cluster assignments for {n} files"
            )

    k = int(assignments.max()) + 1 if n else 0
    members = [np.nonzero(assignments == c)[0] for c in range(k)]
    sizes = [m.size for m in members]

    result = ProgressiveResult(training_indices=[], training_labels=[])
    scanned = result.scanned
    prev_accuracy = 0.0
    round_index = 0
    while True:
        fraction = min(
            config.initial_fraction + round_index * config.increment_fraction,
            config.max_fraction,
        )
        _, drawn = proportional_sample(sizes, n, fraction, config.seed)
        cumulative = set()
        for c in range(k):
            cumulative.update(int(members[c][j]) for j in drawn[c])
        # Diff against everything ever scanned, not just the previous draw:
        # the residual-on-largest rounding can shrink one cluster's count
        # between rounds, and a dropped-then-redrawn file must not be
        # content-scanned a second time.
        new_ids = sorted(i for i in cumulative if i not in scanned)
        for i in new_ids:
            scanned[i] = label_fn(files[i])

        counts = {
            SensitivityLabel.SENSITIVE: 0,
            SensitivityLabel.NON_SENSITIVE: 0,
            SensitivityLabel.UNKNOWN: 0,
        }
        for lab in scanned.values():
            counts[lab] += 1
        if counts[SensitivityLabel.SENSITIVE] + counts[SensitivityLabel.NON_SENSITIVE] == 0:
            raise ValueError("no trainable labels: every sampled file is Unknown")

        train_ids = sorted(
            i for i, lab in scanned.items() if lab is not SensitivityLabel.UNKNOWN
        )
        train_labels = [scanned[i].value for i in train_ids]
        accuracy = trainer_fn(train_ids, train_labels)

        stopped = False
        reason = ""
        if abs(accuracy - prev_accuracy) <= config.accuracy_delta_threshold:
            stopped = True
            reason = "converged"
        elif fraction >= config.max_fraction:
            stopped = True
            reason = "budget"
        elif len(scanned) >= n:
            stopped = True
            reason = "exhausted"

        result.rounds.append(
            SamplingRound(
                index=round_index,
                cumulative_ids=tuple(sorted(scanned)),
                sensitive=counts[SensitivityLabel.SENSITIVE],
                non_sensitive=counts[SensitivityLabel.NON_SENSITIVE],
                unknown=counts[SensitivityLabel.UNKNOWN],
                accuracy=accuracy,
                stopped=stopped,
                reason=reason,
            )
        )
        if stopped:
            result.training_indices = train_ids
            result.training_labels = train_labels
            return result
        prev_accuracy = accuracy
        round_index += 1
