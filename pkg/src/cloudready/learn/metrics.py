"""Binary evaluation metrics with the sensitive class as positive.

Zero-denominator cases (no predicted positives, no true positives, empty
harmonic mean) evaluate to 0 by convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

__all__ = ["Metrics", "evaluate", "POSITIVE_LABEL", "NEGATIVE_LABEL"]

POSITIVE_LABEL = "Sensitive"
NEGATIVE_LABEL = "NonSensitive"


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        total = self.total
        return (self.tp + self.tn) / total if total else 0.0

    @property
    def precision(self) -> float:
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    @property
    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    @property
    def f1(self) -> float:
        p = self.precision
        r = self.recall
        return 2.0 * p * r / (p + r) if p + r > 0.0 else 0.0

    def as_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def evaluate(
    predicted: Sequence[str],
    truth: Sequence[str],
    positive: str = POSITIVE_LABEL,
) -> Metrics:
    """Confusion counts of predicted vs. truth labels.

    Any label other than ``positive`` counts as negative, so both
    two-string label sets and richer label alphabets degrade sanely.
    """
    if len(predicted) != len(truth):
        raise ValueError(
            f"predicted ({len(predicted)}) and truth ({len(truth)}) lengths differ"
        )
    if not truth:
        raise ValueError("cannot evaluate an empty label sequence")
    tp = fp = fn = tn = 0
    for p, t in zip(predicted, truth):
        if p == positive:
            if t == positive:
                tp += 1
            else:
                fp += 1
        else:
            if t == positive:
                fn += 1
            else:
                tn += 1
    return Metrics(tp=tp, fp=fp, fn=fn, tn=tn)
