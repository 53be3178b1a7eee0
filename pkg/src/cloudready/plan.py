"""Migration planning: sensitivity scores, quadrant classification,
per-user maps, scan-reduction accounting, and deterministic SVG/CSV plots.

A subject lands in PublicCloudCandidate only when its sensitivity score is
strictly below the y threshold AND its hotness is strictly below the x
threshold; values on a threshold stay private — the conservative side.
Subjects whose files are majority-Unknown cannot be classified either way
and are routed to NeedsDomainReview.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Mapping, Sequence

from .dictionary import SensitivityLabel
from .scan import FileMeta

__all__ = [
    "Quadrant",
    "SensitivityScore",
    "Recommendation",
    "UserPoint",
    "ScanReductionReport",
    "volume_scores",
    "classify",
    "user_map",
    "scan_reduction_report",
    "emit_maps",
    "DEFAULT_X_THRESHOLD",
    "DEFAULT_Y_THRESHOLD",
]

DEFAULT_X_THRESHOLD = 0.01  # hotness (IO/s/GB at volume level)
DEFAULT_Y_THRESHOLD = 0.5  # sensitivity score

_SENSITIVE = SensitivityLabel.SENSITIVE.value
_UNKNOWN = SensitivityLabel.UNKNOWN.value


class Quadrant(enum.Enum):
    PUBLIC_CLOUD_CANDIDATE = "PublicCloudCandidate"
    PRIVATE_OR_ON_PREMISE = "PrivateOrOnPremise"
    NEEDS_DOMAIN_REVIEW = "NeedsDomainReview"


@dataclass(frozen=True)
class SensitivityScore:
    subject: str  # "volume" | "user_folder"
    subject_id: str
    sensitive_count: int
    total_count: int
    unknown_count: int = 0

    def __post_init__(self):
        if self.total_count < 1:
            raise ValueError("total_count must be >= 1")
        if not 0 <= self.sensitive_count <= self.total_count:
            raise ValueError("need 0 <= sensitive_count <= total_count")

    @property
    def score(self) -> float:
        return self.sensitive_count / self.total_count

    @property
    def majority_unknown(self) -> bool:
        return 2 * self.unknown_count > self.total_count


@dataclass(frozen=True)
class Recommendation:
    subject_id: str
    sensitivity: float
    hotness: float
    quadrant: Quadrant
    x_threshold: float
    y_threshold: float


@dataclass(frozen=True)
class UserPoint:
    user_id: str  # "<volume>/<user folder>"
    volume_id: str
    user_folder: str
    sensitivity: float
    hotness: float  # fraction of files accessed within the last year
    file_count: int


def _as_label_str(label) -> str:
    return label.value if isinstance(label, SensitivityLabel) else str(label)


def volume_scores(
    files: Sequence[FileMeta], labels: Sequence
) -> dict[str, SensitivityScore]:
    """Per-volume sensitive-file ratio from per-file labels."""
    if len(files) != len(labels):
        raise ValueError(f"{len(files)} files but {len(labels)} labels")
    sensitive: dict[str, int] = {}
    unknown: dict[str, int] = {}
    total: dict[str, int] = {}
    for meta, label in zip(files, labels):
        lab = _as_label_str(label)
        v = meta.volume_id
        total[v] = total.get(v, 0) + 1
        if lab == _SENSITIVE:
            sensitive[v] = sensitive.get(v, 0) + 1
        elif lab == _UNKNOWN:
            unknown[v] = unknown.get(v, 0) + 1
    return {
        v: SensitivityScore(
            subject="volume",
            subject_id=v,
            sensitive_count=sensitive.get(v, 0),
            total_count=total[v],
            unknown_count=unknown.get(v, 0),
        )
        for v in sorted(total)
    }


def classify(
    scores: Mapping[str, SensitivityScore],
    hotness: Mapping[str, float],
    x_threshold: float = DEFAULT_X_THRESHOLD,
    y_threshold: float = DEFAULT_Y_THRESHOLD,
) -> list[Recommendation]:
    """One Recommendation per scored subject, sorted by subject id."""
    if x_threshold < 0:
        raise ValueError(f"x_threshold must be >= 0, got {x_threshold}")
    if not 0.0 <= y_threshold <= 1.0:
        raise ValueError(f"y_threshold must be in [0, 1], got {y_threshold}")
    out = []
    for subject_id in sorted(scores):
        score = scores[subject_id]
        hot = float(hotness.get(subject_id, 0.0))
        if score.majority_unknown:
            quadrant = Quadrant.NEEDS_DOMAIN_REVIEW
        elif score.score < y_threshold and hot < x_threshold:
            quadrant = Quadrant.PUBLIC_CLOUD_CANDIDATE
        else:
            quadrant = Quadrant.PRIVATE_OR_ON_PREMISE
        out.append(
            Recommendation(
                subject_id=subject_id,
                sensitivity=score.score,
                hotness=hot,
                quadrant=quadrant,
                x_threshold=x_threshold,
                y_threshold=y_threshold,
            )
        )
    return out


def user_map(
    files: Sequence[FileMeta], labels: Sequence, now: datetime
) -> list[UserPoint]:
    """Per-user-folder sensitivity vs. access-recency hotness.

    hotness = 1 − (fraction not accessed in the past year): a folder whose
    files were all touched recently scores 1. Files at a volume root (no
    user folder) carry no user attribution and are skipped.
    """
    if len(files) != len(labels):
        raise ValueError(f"{len(files)} files but {len(labels)} labels")
    year_ago = now - timedelta(days=365)
    total: dict[tuple[str, str], int] = {}
    sensitive: dict[tuple[str, str], int] = {}
    stale: dict[tuple[str, str], int] = {}
    for meta, label in zip(files, labels):
        if not meta.user_folder:
            continue
        key = (meta.volume_id, meta.user_folder)
        total[key] = total.get(key, 0) + 1
        if _as_label_str(label) == _SENSITIVE:
            sensitive[key] = sensitive.get(key, 0) + 1
        if meta.last_accessed <= year_ago:
            stale[key] = stale.get(key, 0) + 1
    points = []
    for key in sorted(total):
        volume_id, folder = key
        n = total[key]
        points.append(
            UserPoint(
                user_id=f"{volume_id}/{folder}",
                volume_id=volume_id,
                user_folder=folder,
                sensitivity=sensitive.get(key, 0) / n,
                hotness=1.0 - stale.get(key, 0) / n,
                file_count=n,
            )
        )
    return points


@dataclass(frozen=True)
class ScanReductionReport:
    """Content-scan cost accounting over binary-labeled files.

    rescan_fraction: share labeled non-sensitive — the files a downstream
    migration would content-scan again, versus scanning everything.
    over_protected_fraction: share wrongly labeled sensitive (needs truth).
    baseline_over_protection: p(1-p) — what uninformed random labeling at
    the same sensitive share p would over-protect.
    """

    total: int
    predicted_sensitive: int
    predicted_non_sensitive: int
    rescan_fraction: float
    sensitive_share: float
    baseline_over_protection: float
    over_protected_fraction: float | None = None
    truth_sample_size: int | None = None

    def to_json(self) -> str:
        obj = {
            "total": self.total,
            "predicted_sensitive": self.predicted_sensitive,
            "predicted_non_sensitive": self.predicted_non_sensitive,
            "rescan_fraction": self.rescan_fraction,
            "sensitive_share": self.sensitive_share,
            "baseline_over_protection": self.baseline_over_protection,
            "over_protected_fraction": self.over_protected_fraction,
            "truth_sample_size": self.truth_sample_size,
        }
        return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2)


def scan_reduction_report(
    predictions: Sequence,
    truth: Sequence | None = None,
    sensitive_share: float | None = None,
) -> ScanReductionReport:
    """Scan-cost report from binary predictions, optionally with truth.

    With ``truth`` (aligned, same length) the over-protected fraction is
    fp/total and the sensitive share comes from truth; otherwise the share
    comes from the predictions themselves unless given explicitly.
    """
    preds = [_as_label_str(p) for p in predictions]
    if not preds:
        raise ValueError("no predictions to report on")
    if any(p == _UNKNOWN for p in preds):
        raise ValueError("scan reduction is defined over binary-labeled files only")
    total = len(preds)
    pred_sensitive = sum(1 for p in preds if p == _SENSITIVE)
    pred_non = total - pred_sensitive

    over_protected = None
    truth_n = None
    if truth is not None:
        truths = [_as_label_str(t) for t in truth]
        if len(truths) != total:
            raise ValueError(f"{total} predictions but {len(truths)} truth labels")
        fp = sum(1 for p, t in zip(preds, truths) if p == _SENSITIVE and t != _SENSITIVE)
        over_protected = fp / total
        truth_n = total
        if sensitive_share is None:
            sensitive_share = sum(1 for t in truths if t == _SENSITIVE) / total
    if sensitive_share is None:
        sensitive_share = pred_sensitive / total

    return ScanReductionReport(
        total=total,
        predicted_sensitive=pred_sensitive,
        predicted_non_sensitive=pred_non,
        rescan_fraction=pred_non / total,
        sensitive_share=sensitive_share,
        baseline_over_protection=sensitive_share * (1.0 - sensitive_share),
        over_protected_fraction=over_protected,
        truth_sample_size=truth_n,
    )


# ---------------------------------------------------------------- plotting

_SVG_W = 640
_SVG_H = 480
_MARGIN_L = 70
_MARGIN_R = 30
_MARGIN_T = 30
_MARGIN_B = 50

_QUADRANT_FILL = {
    Quadrant.PUBLIC_CLOUD_CANDIDATE: "#2e7d32",
    Quadrant.PRIVATE_OR_ON_PREMISE: "#c62828",
    Quadrant.NEEDS_DOMAIN_REVIEW: "#f9a825",
}


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _scatter_svg(
    points: Sequence[tuple[str, float, float, str]],
    x_threshold: float | None,
    y_threshold: float | None,
    x_label: str,
    y_label: str,
    title: str,
) -> str:
    """Hand-rolled scatter plot; output depends only on the arguments."""
    xs = [x for _, x, _, _ in points]
    x_max_data = max(xs) if xs else 0.0
    x_max = max(x_max_data * 1.1, (x_threshold or 0.0) * 2.0, 1e-6)
    y_max = 1.0  # sensitivity / hotness fractions
    plot_w = _SVG_W - _MARGIN_L - _MARGIN_R
    plot_h = _SVG_H - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x / x_max) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (1.0 - y / y_max) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" height="{_SVG_H}" '
        f'viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="white"/>',
        f'<text x="{_SVG_W / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<rect x="{_MARGIN_L}" y="{_MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_SVG_H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.1f})">{y_label}</text>',
    ]
    # Axis end labels.
    parts.append(
        f'<text x="{_MARGIN_L}" y="{_SVG_H - 32}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">0</text>'
    )
    parts.append(
        f'<text x="{_MARGIN_L + plot_w}" y="{_SVG_H - 32}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="10">{_fmt(x_max)}</text>'
    )
    parts.append(
        f'<text x="{_MARGIN_L - 8}" y="{py(0.0) + 4:.1f}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">0</text>'
    )
    parts.append(
        f'<text x="{_MARGIN_L - 8}" y="{py(1.0) + 4:.1f}" text-anchor="end" '
        f'font-family="sans-serif" font-size="10">1</text>'
    )
    if x_threshold is not None and 0.0 <= x_threshold <= x_max:
        x = px(x_threshold)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_T}" x2="{x:.2f}" y2="{_MARGIN_T + plot_h}" '
            f'stroke="#1565c0" stroke-width="1" stroke-dasharray="6 3"/>'
        )
        parts.append(
            f'<text x="{x + 4:.2f}" y="{_MARGIN_T + 12}" font-family="sans-serif" '
            f'font-size="10" fill="#1565c0">x={_fmt(x_threshold)}</text>'
        )
    if y_threshold is not None and 0.0 <= y_threshold <= y_max:
        y = py(y_threshold)
        parts.append(
            f'<line x1="{_MARGIN_L}" y1="{y:.2f}" x2="{_MARGIN_L + plot_w}" y2="{y:.2f}" '
            f'stroke="#1565c0" stroke-width="1" stroke-dasharray="6 3"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L + plot_w - 4:.2f}" y="{y - 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" fill="#1565c0">y={_fmt(y_threshold)}</text>'
        )
    for label, x, y, color in points:
        cx = px(min(x, x_max))
        cy = py(min(y, y_max))
        parts.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="4" fill="{color}"/>')
        parts.append(
            f'<text x="{cx + 6:.2f}" y="{cy - 6:.2f}" font-family="sans-serif" '
            f'font-size="10">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_maps(
    recommendations: Sequence[Recommendation],
    user_points: Sequence[UserPoint],
    dest_dir: str | Path,
    x_threshold: float = DEFAULT_X_THRESHOLD,
    y_threshold: float = DEFAULT_Y_THRESHOLD,
) -> dict[str, Path]:
    """Write volume_map.{svg,csv} and user_map.{svg,csv} under dest_dir.

    Output bytes are a pure function of the inputs, and each CSV lists the
    same points as its SVG twin.
    """
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    paths = {
        "volume_svg": dest / "volume_map.svg",
        "volume_csv": dest / "volume_map.csv",
        "user_svg": dest / "user_map.svg",
        "user_csv": dest / "user_map.csv",
    }

    vol_points = [
        (r.subject_id, r.hotness, r.sensitivity, _QUADRANT_FILL[r.quadrant])
        for r in recommendations
    ]
    paths["volume_svg"].write_text(
        _scatter_svg(
            vol_points,
            x_threshold,
            y_threshold,
            "IO density (IO/s per GB)",
            "sensitivity score",
            "Volume sensitivity vs. IO density",
        ),
        encoding="utf-8",
    )
    with open(paths["volume_csv"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["volume_id", "sensitivity", "io_density", "quadrant"])
        for r in recommendations:
            writer.writerow([r.subject_id, repr(r.sensitivity), repr(r.hotness), r.quadrant.value])

    usr_points = [
        (p.user_folder, p.hotness, p.sensitivity, "#455a64") for p in user_points
    ]
    paths["user_svg"].write_text(
        _scatter_svg(
            usr_points,
            None,
            y_threshold,
            "data hotness (accessed within 1y fraction)",
            "sensitivity score",
            "User sensitivity vs. data hotness",
        ),
        encoding="utf-8",
    )
    with open(paths["user_csv"], "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "sensitivity", "hotness", "file_count"])
        for p in user_points:
            writer.writerow([p.user_id, repr(p.sensitivity), repr(p.hotness), p.file_count])

    return paths
