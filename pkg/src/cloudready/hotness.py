"""IO density and volume metadata aggregation.

Density is IO operations per second per GB (GB = 1e9 bytes), averaged over
hourly samples. Profiles aggregate file metadata against an explicit `now`
timestamp — never the wall clock — so reports are reproducible.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Iterable, Sequence

from .scan import FileMeta, IopsSample

__all__ = [
    "GB",
    "SECONDS_PER_HOUR",
    "IoDensity",
    "VolumeProfile",
    "io_density",
    "not_accessed_after_two_weeks",
    "aggregate_volume",
    "density_band",
    "write_profiles_csv",
    "read_profiles_csv",
    "write_profiles_json",
]

GB = 1e9  # bytes per GB in density arithmetic
SECONDS_PER_HOUR = 3600.0

ONE_YEAR = timedelta(days=365)
THREE_YEARS = timedelta(days=3 * 365)
TWO_WEEKS = timedelta(days=14)

# Default density bands: cold below 0.01 IO/s/GB, hot from 0.1 up.
COLD_BELOW = 0.01
HOT_FROM = 0.1


@dataclass(frozen=True)
class IoDensity:
    mean: float
    low: float  # lowest hourly density
    high: float  # highest hourly density


@dataclass(frozen=True)
class VolumeProfile:
    volume_id: str
    total_size: int  # provisioned bytes (density denominator)
    total_file_count: int
    total_file_size: int  # sum of file sizes (used bytes)
    top3_extensions_by_size: tuple[str, ...]
    top3_extensions_by_count: tuple[str, ...]
    pct_not_modified_1y_count: float
    pct_not_modified_1y_size: float
    pct_not_modified_3y_count: float
    pct_not_modified_3y_size: float
    pct_not_accessed_1y_count: float
    pct_not_accessed_1y_size: float
    pct_not_accessed_3y_count: float
    pct_not_accessed_3y_size: float
    pct_not_accessed_after_2w_count: float
    pct_not_accessed_after_2w_size: float
    io_density: float
    io_density_min: float = 0.0
    io_density_max: float = 0.0


def io_density(samples: Sequence[IopsSample], volume_size: int | float) -> IoDensity:
    """Hourly-average IO/s per GB, with the hourly (min, max) range."""
    if volume_size <= 0:
        raise ValueError(f"volume_size must be positive, got {volume_size}")
    if not samples:
        raise ValueError("need at least one IOPS sample")
    size_gb = volume_size / GB
    hourly = [(s.io_ops / SECONDS_PER_HOUR) / size_gb for s in samples]
    return IoDensity(mean=sum(hourly) / len(hourly), low=min(hourly), high=max(hourly))


def not_accessed_after_two_weeks(meta: FileMeta) -> bool:
    """True when the file was never accessed later than creation + 14 days.

    The source metric name does not pin this down; this predicate is the
    single place the interpretation lives.
    """
    return meta.last_accessed <= meta.created + TWO_WEEKS


def _top3(totals: dict[str, int]) -> tuple[str, ...]:
    # Largest first; equal totals order lexicographically.
    ranked = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(ext for ext, _ in ranked[:3])


# Real extensions always start with a dot, so this marker for the
# no-extension group cannot collide in the CSV encoding.
_NO_EXTENSION = "(none)"


def _encode_ext_list(exts: tuple[str, ...]) -> str:
    return "|".join(e if e else _NO_EXTENSION for e in exts)


def _decode_ext_list(cell: str) -> tuple[str, ...]:
    if not cell:
        return ()
    return tuple("" if e == _NO_EXTENSION else e for e in cell.split("|"))


def aggregate_volume(
    files: Sequence[FileMeta],
    now: datetime,
    samples: Sequence[IopsSample] = (),
    total_size: int | None = None,
) -> VolumeProfile:
    """Aggregate one volume's files (and optional IOPS series) to a profile.

    ``total_size`` is the provisioned capacity; when unknown it defaults to
    the summed file sizes. Without IOPS samples the density fields are 0.
    """
    if not files:
        raise ValueError("cannot profile an empty volume")
    volume_ids = {f.volume_id for f in files}
    if len(volume_ids) != 1:
        raise ValueError(f"files span multiple volumes: {sorted(volume_ids)}")
    volume_id = files[0].volume_id

    n = len(files)
    total_file_size = sum(f.file_size for f in files)
    size_denominator = max(total_file_size, 1)

    ext_size: dict[str, int] = {}
    ext_count: dict[str, int] = {}
    nm1c = nm1s = nm3c = nm3s = 0
    na1c = na1s = na3c = na3s = 0
    na2wc = na2ws = 0
    for f in files:
        ext_size[f.extension] = ext_size.get(f.extension, 0) + f.file_size
        ext_count[f.extension] = ext_count.get(f.extension, 0) + 1
        if f.last_modified <= now - ONE_YEAR:
            nm1c += 1
            nm1s += f.file_size
        if f.last_modified <= now - THREE_YEARS:
            nm3c += 1
            nm3s += f.file_size
        if f.last_accessed <= now - ONE_YEAR:
            na1c += 1
            na1s += f.file_size
        if f.last_accessed <= now - THREE_YEARS:
            na3c += 1
            na3s += f.file_size
        if not_accessed_after_two_weeks(f):
            na2wc += 1
            na2ws += f.file_size

    provisioned = total_file_size if total_size is None else int(total_size)
    if samples:
        density = io_density(samples, max(provisioned, 1))
    else:
        density = IoDensity(0.0, 0.0, 0.0)

    return VolumeProfile(
        volume_id=volume_id,
        total_size=provisioned,
        total_file_count=n,
        total_file_size=total_file_size,
        top3_extensions_by_size=_top3(ext_size),
        top3_extensions_by_count=_top3(ext_count),
        pct_not_modified_1y_count=100.0 * nm1c / n,
        pct_not_modified_1y_size=100.0 * nm1s / size_denominator,
        pct_not_modified_3y_count=100.0 * nm3c / n,
        pct_not_modified_3y_size=100.0 * nm3s / size_denominator,
        pct_not_accessed_1y_count=100.0 * na1c / n,
        pct_not_accessed_1y_size=100.0 * na1s / size_denominator,
        pct_not_accessed_3y_count=100.0 * na3c / n,
        pct_not_accessed_3y_size=100.0 * na3s / size_denominator,
        pct_not_accessed_after_2w_count=100.0 * na2wc / n,
        pct_not_accessed_after_2w_size=100.0 * na2ws / size_denominator,
        io_density=density.mean,
        io_density_min=density.low,
        io_density_max=density.high,
    )


def density_band(density: float, cold_below: float = COLD_BELOW, hot_from: float = HOT_FROM) -> str:
    """cold | warm | hot classification of a density value."""
    if density < cold_below:
        return "cold"
    if density < hot_from:
        return "warm"
    return "hot"


_PROFILE_COLUMNS = (
    "volume_id",
    "total_size",
    "total_file_count",
    "total_file_size",
    "top3_extensions_by_size",
    "top3_extensions_by_count",
    "pct_not_modified_1y_count",
    "pct_not_modified_1y_size",
    "pct_not_modified_3y_count",
    "pct_not_modified_3y_size",
    "pct_not_accessed_1y_count",
    "pct_not_accessed_1y_size",
    "pct_not_accessed_3y_count",
    "pct_not_accessed_3y_size",
    "pct_not_accessed_after_2w_count",
    "pct_not_accessed_after_2w_size",
    "io_density",
    "io_density_min",
    "io_density_max",
)


def _profile_row(p: VolumeProfile) -> list:
    return [
        p.volume_id,
        p.total_size,
        p.total_file_count,
        p.total_file_size,
        _encode_ext_list(p.top3_extensions_by_size),
        _encode_ext_list(p.top3_extensions_by_count),
        repr(p.pct_not_modified_1y_count),
        repr(p.pct_not_modified_1y_size),
        repr(p.pct_not_modified_3y_count),
        repr(p.pct_not_modified_3y_size),
        repr(p.pct_not_accessed_1y_count),
        repr(p.pct_not_accessed_1y_size),
        repr(p.pct_not_accessed_3y_count),
        repr(p.pct_not_accessed_3y_size),
        repr(p.pct_not_accessed_after_2w_count),
        repr(p.pct_not_accessed_after_2w_size),
        repr(p.io_density),
        repr(p.io_density_min),
        repr(p.io_density_max),
    ]


def write_profiles_csv(profiles: Iterable[VolumeProfile], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_PROFILE_COLUMNS)
        for p in profiles:
            writer.writerow(_profile_row(p))


def read_profiles_csv(path: str | Path) -> list[VolumeProfile]:
    profiles = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != _PROFILE_COLUMNS:
            raise ValueError(f"{path}: unexpected profile CSV header")
        for row in reader:
            profiles.append(
                VolumeProfile(
                    volume_id=row["volume_id"],
                    total_size=int(row["total_size"]),
                    total_file_count=int(row["total_file_count"]),
                    total_file_size=int(row["total_file_size"]),
                    top3_extensions_by_size=_decode_ext_list(row["top3_extensions_by_size"]),
                    top3_extensions_by_count=_decode_ext_list(row["top3_extensions_by_count"]),
                    pct_not_modified_1y_count=float(row["pct_not_modified_1y_count"]),
                    pct_not_modified_1y_size=float(row["pct_not_modified_1y_size"]),
                    pct_not_modified_3y_count=float(row["pct_not_modified_3y_count"]),
                    pct_not_modified_3y_size=float(row["pct_not_modified_3y_size"]),
                    pct_not_accessed_1y_count=float(row["pct_not_accessed_1y_count"]),
                    pct_not_accessed_1y_size=float(row["pct_not_accessed_1y_size"]),
                    pct_not_accessed_3y_count=float(row["pct_not_accessed_3y_count"]),
                    pct_not_accessed_3y_size=float(row["pct_not_accessed_3y_size"]),
                    pct_not_accessed_after_2w_count=float(row["pct_not_accessed_after_2w_count"]),
                    pct_not_accessed_after_2w_size=float(row["pct_not_accessed_after_2w_size"]),
                    io_density=float(row["io_density"]),
                    io_density_min=float(row["io_density_min"]),
                    io_density_max=float(row["io_density_max"]),
                )
            )
    return profiles


def write_profiles_json(profiles: Iterable[VolumeProfile], path: str | Path) -> None:
    docs = []
    for p in profiles:
        doc = {col: getattr(p, col) for col in _PROFILE_COLUMNS if not col.startswith("top3")}
        doc["top3_extensions_by_size"] = list(p.top3_extensions_by_size)
        doc["top3_extensions_by_count"] = list(p.top3_extensions_by_count)
        docs.append(doc)
    Path(path).write_text(
        json.dumps(docs, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
