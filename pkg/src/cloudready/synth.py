"""Synthetic multi-volume corpus generator for benchmarks and end-to-end tests.

Produces a directory with:

  corpus.jsonl   authoritative metadata records (synthetic timestamps)
  volumes/<id>/  on-disk file trees whose text content matches the labels
  iops.csv       hourly IO counts per volume
  volumes.csv    provisioned capacity per volume
  manifest.csv   ground-truth label per file (file_id,label)

Text files of truly sensitive files contain 1-3 planted detector hits
(emails, SSN-shaped ids, Luhn-valid card numbers, phone numbers, risk
keywords); non-sensitive text files contain only filler words that no
built-in detector matches. Content scanning therefore recovers the true
label exactly on every crawlable file. A small fraction of files is
binary (not crawlable) and exercises the Unknown path.

Extensions and name tokens are drawn from per-class pools with independent
per-attribute fidelity coins (``signal_strength``), so metadata-only
classifiers can beat the single-attribute accuracy by combining signals,
while no single attribute is a giveaway. A third signal lives in file
size: word counts fall into class-styled bands with equal means (outer
fifths of the range for the sensitive style, the middle fifth otherwise),
which rewards threshold-splitting models specifically. User folders are
uniform noise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from .dictionary import SensitivityLabel, luhn_valid
from .scan import FileMeta, IopsSample, extension_of, write_corpus, write_iops, write_volume_sizes

__all__ = ["GenSpec", "GenResult", "generate_corpus", "read_manifest"]

_GB = 1e9

# Pools: sensitive-class first element, non-sensitive second.
_EXT_POOLS = (
    (".csv", ".sql", ".log", ".txt"),
    (".md", ".rst", ".ini", ".yaml"),
)
_NAME_POOLS = (
    ("payroll", "employee", "compensation", "contract", "customer", "account", "medical", "audit"),
    ("readme", "design", "meeting", "roadmap", "build", "release", "tutorial", "changelog"),
)
# User folders carry no class signal: both styles are equally likely for
# either class, so per-user sensitivity varies only through the volume mix.
_USER_POOLS = (
    ("hr", "finance", "legal", "exec"),
    ("eng", "marketing", "support", "docs"),
)
_NEUTRAL_TOKENS = ("notes", "draft", "final", "copy", "report", "summary", "log", "data")
_SUBFOLDERS = ("reports", "archive", "data", "notes")

# Filler vocabulary: alphabetic words only, disjoint from the keyword
# detector list, so filler text can never produce a detector hit.
_FILLER_WORDS = (
    "alpha", "branch", "cycle", "docket", "engine", "fabric", "harbor",
    "indigo", "jigsaw", "kernel", "ledger", "matrix", "nimbus", "outline",
    "pillar", "quartz", "ribbon", "stream", "timber", "vector", "willow",
    "zenith", "anchor", "beacon", "copper", "ember", "fallow", "garnet",
    "hollow", "iris",
)
_HIT_KEYWORDS = ("confidential", "proprietary", "ssn", "salary", "password")


@dataclass(frozen=True)
class GenSpec:
    """Shape of the generated corpus; all per-volume tuples must align.

    Three class signals are planted, each holding at ``signal_strength``
    fidelity per file: the extension pool, the name-token pool, and a
    word-count band. The band signal is deliberately non-monotone —
    sensitive-style files draw word counts from the outer fifths of
    ``text_words`` while non-sensitive-style files draw from the middle
    fifth — so both bands share the same mean and only threshold-based
    models can exploit file size.

    ``io_density`` is the target IO/s per provisioned GB for each volume;
    ``access_age_days`` bounds how stale each volume's newest-access times
    can be (hot volumes get recent atimes, cold ones mostly stale).
    """

    files_per_volume: tuple[int, ...] = (4000, 3600, 3400, 3000, 2600, 2200, 1200)
    volume_size_gb: tuple[float, ...] = (500.0, 800.0, 6060.0, 200.0, 660.0, 1000.0, 100.0)
    io_density: tuple[float, ...] = (0.002, 0.005, 0.008, 0.02, 0.05, 0.3, 0.8)
    access_age_days: tuple[float, ...] = (1460.0, 1200.0, 1000.0, 730.0, 400.0, 120.0, 45.0)
    sensitive_fractions: tuple[float, ...] = (0.2, 0.3, 0.55, 0.5, 0.6, 0.4, 0.7)
    signal_strength: float = 0.9
    unknown_rate: float = 0.02
    text_words: tuple[int, int] = (400, 2400)
    binary_bytes: tuple[int, int] = (8192, 65536)
    hours: int = 24
    seed: int = 42
    anchor: datetime = datetime(2025, 6, 1, tzinfo=timezone.utc)

    def __post_init__(self):
        n = len(self.files_per_volume)
        if n == 0:
            raise ValueError("need at least one volume")
        for name in ("volume_size_gb", "io_density", "access_age_days", "sensitive_fractions"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must list one value per volume ({n})")
        if any(c < 1 for c in self.files_per_volume):
            raise ValueError("files_per_volume entries must be >= 1")
        if any(s <= 0 for s in self.volume_size_gb):
            raise ValueError("volume_size_gb entries must be positive")
        if any(d < 0 for d in self.io_density):
            raise ValueError("io_density entries must be >= 0")
        if any(a <= 0 for a in self.access_age_days):
            raise ValueError("access_age_days entries must be positive")
        if any(not 0.0 <= f <= 1.0 for f in self.sensitive_fractions):
            raise ValueError("sensitive_fractions must be in [0, 1]")
        if not 0.5 <= self.signal_strength <= 1.0:
            raise ValueError(f"signal_strength must be in [0.5, 1], got {self.signal_strength}")
        if not 0.0 <= self.unknown_rate <= 1.0:
            raise ValueError(f"unknown_rate must be in [0, 1], got {self.unknown_rate}")
        lo, hi = self.text_words
        if not (1 <= lo and lo + 5 <= hi):
            raise ValueError(f"text_words needs 1 <= lo and lo + 5 <= hi, got ({lo}, {hi})")
        lo, hi = self.binary_bytes
        if not 1 <= lo <= hi:
            raise ValueError(f"binary_bytes must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
        if self.hours < 1:
            raise ValueError("hours must be >= 1")
        if self.anchor.tzinfo is None:
            raise ValueError("anchor must be timezone-aware")

    @property
    def volume_ids(self) -> tuple[str, ...]:
        return tuple(f"vol{i + 1:02d}" for i in range(len(self.files_per_volume)))


@dataclass(frozen=True)
class GenResult:
    root: Path
    corpus_path: Path
    iops_path: Path
    sizes_path: Path
    manifest_path: Path
    n_files: int
    n_sensitive: int
    n_non_sensitive: int
    n_binary: int
    volume_ids: tuple[str, ...]


def _luhn_card(rng: np.random.Generator) -> str:
    """A Luhn-valid 16-digit card number grouped in fours."""
    payload = "".join(str(int(d)) for d in rng.integers(0, 10, size=15))
    for check in "0123456789":
        if luhn_valid(payload + check):
            digits = payload + check
            break
    return " ".join(digits[i : i + 4] for i in range(0, 16, 4))


def _detector_hit(rng: np.random.Generator) -> str:
    kind = int(rng.integers(0, 5))
    if kind == 0:
        w1 = _FILLER_WORDS[int(rng.integers(0, len(_FILLER_WORDS)))]
        w2 = _FILLER_WORDS[int(rng.integers(0, len(_FILLER_WORDS)))]
        return f"{w1}.{w2}@example.com"
    if kind == 1:
        a = int(rng.integers(200, 1000))
        b = int(rng.integers(200, 1000))
        c = int(rng.integers(0, 10000))
        return f"{a}-{b}-{c:04d}"
    if kind == 2:
        a = int(rng.integers(0, 1000))
        b = int(rng.integers(0, 100))
        c = int(rng.integers(0, 10000))
        return f"{a:03d}-{b:02d}-{c:04d}"
    if kind == 3:
        return _luhn_card(rng)
    return _HIT_KEYWORDS[int(rng.integers(0, len(_HIT_KEYWORDS)))]


def _text_content(rng: np.random.Generator, n_words: int, n_hits: int) -> str:
    idx = rng.integers(0, len(_FILLER_WORDS), size=n_words)
    words = [_FILLER_WORDS[int(i)] for i in idx]
    for _ in range(n_hits):
        pos = int(rng.integers(0, len(words) + 1))
        words.insert(pos, _detector_hit(rng))
    lines = [" ".join(words[i : i + 12]) for i in range(0, len(words), 12)]
    return "\n".join(lines) + "\n"


def _pick(rng: np.random.Generator, pool: Sequence[str]) -> str:
    return pool[int(rng.integers(0, len(pool)))]


def _class_index(rng: np.random.Generator, own: int, fidelity: float) -> int:
    """``own`` with probability ``fidelity``, the other class otherwise."""
    return own if float(rng.random()) < fidelity else 1 - own


def _band_words(rng: np.random.Generator, bounds: tuple[int, int], band_class: int) -> int:
    """Word count from the class-styled band of ``bounds``.

    The range splits into five equal slices; sensitive style (0) draws
    uniformly from the first or last slice, non-sensitive style (1) from
    the middle slice. Both styles share the same mean word count.
    """
    lo, hi = bounds
    s = (hi - lo) // 5
    if band_class == 0:
        if float(rng.random()) < 0.5:
            return int(rng.integers(lo, lo + s + 1))
        return int(rng.integers(hi - s, hi + 1))
    return int(rng.integers(lo + 2 * s, hi - 2 * s + 1))


def generate_corpus(dest: str | Path, spec: GenSpec | None = None) -> GenResult:
    """Write a synthetic corpus under ``dest`` (must be empty or absent)."""
    spec = spec or GenSpec()
    dest = Path(dest)
    if dest.exists():
        if not dest.is_dir():
            raise ValueError(f"destination is not a directory: {dest}")
        if any(dest.iterdir()):
            raise ValueError(f"destination directory is not empty: {dest}")
    dest.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(spec.seed)
    records: list[FileMeta] = []
    manifest: list[tuple[str, str]] = []
    n_sensitive = n_non = n_binary = 0
    counter = 0

    for v, volume_id in enumerate(spec.volume_ids):
        vol_root = dest / "volumes" / volume_id
        max_age = spec.access_age_days[v]
        vol_records: list[tuple[FileMeta, bytes]] = []
        for _ in range(spec.files_per_volume[v]):
            counter += 1
            own = 0 if float(rng.random()) < spec.sensitive_fractions[v] else 1
            binary = float(rng.random()) < spec.unknown_rate
            ext_class = _class_index(rng, own, spec.signal_strength)
            name_class = _class_index(rng, own, spec.signal_strength)
            band_class = _class_index(rng, own, spec.signal_strength)

            extension = ".bin" if binary else _pick(rng, _EXT_POOLS[ext_class])
            tok1 = _pick(rng, _NAME_POOLS[name_class])
            tok2 = _pick(rng, _NAME_POOLS[name_class])
            neutral = _pick(rng, _NEUTRAL_TOKENS)
            file_name = f"{tok1}_{tok2}_{neutral}_{counter:05d}{extension}"
            user = _pick(rng, _USER_POOLS[int(rng.integers(0, 2))])
            sub = _pick(rng, _SUBFOLDERS)
            rel_dir = f"{user}/{sub}"

            if binary:
                lo, hi = spec.binary_bytes
                size = int(rng.integers(lo, hi + 1))
                content = rng.integers(0, 256, size=size, dtype=np.uint8).tobytes()
                n_binary += 1
            else:
                n_words = _band_words(rng, spec.text_words, band_class)
                n_hits = int(rng.integers(1, 4)) if own == 0 else 0
                content = _text_content(rng, n_words, n_hits).encode("utf-8")
            if own == 0:
                n_sensitive += 1
            else:
                n_non += 1

            access_age = float(rng.uniform(0.0, max_age))
            created_age = access_age + float(rng.uniform(0.0, 500.0))
            modified_age = float(rng.uniform(access_age, created_age))
            changed_age = float(rng.uniform(access_age, modified_age))
            last_accessed = spec.anchor - timedelta(days=access_age)
            created = spec.anchor - timedelta(days=created_age)
            last_modified = spec.anchor - timedelta(days=modified_age)
            changed = spec.anchor - timedelta(days=changed_age)

            meta = FileMeta(
                volume_id=volume_id,
                file_name=file_name,
                extension=extension_of(file_name),
                path=rel_dir,
                last_accessed=last_accessed,
                created=created,
                changed=changed,
                last_modified=last_modified,
                file_size=len(content),
                bytes_used=((len(content) + 511) // 512) * 512,
                user_folder=user,
            )
            vol_records.append((meta, content))
            label = SensitivityLabel.SENSITIVE if own == 0 else SensitivityLabel.NON_SENSITIVE
            manifest.append((meta.file_id(), label.value))

        vol_records.sort(key=lambda pair: (pair[0].path, pair[0].file_name))
        for meta, content in vol_records:
            fs_path = vol_root / meta.path / meta.file_name
            fs_path.parent.mkdir(parents=True, exist_ok=True)
            fs_path.write_bytes(content)
            os.utime(fs_path, (meta.last_accessed.timestamp(), meta.last_modified.timestamp()))
            records.append(meta)

    corpus_path = dest / "corpus.jsonl"
    write_corpus(records, corpus_path)

    iops_path = dest / "iops.csv"
    hour0 = spec.anchor.replace(minute=0, second=0, microsecond=0) - timedelta(hours=spec.hours)
    samples = []
    for v, volume_id in enumerate(spec.volume_ids):
        hourly = spec.io_density[v] * spec.volume_size_gb[v] * 3600.0
        for h in range(spec.hours):
            jitter = float(rng.uniform(0.8, 1.2))
            samples.append(
                IopsSample(
                    volume_id=volume_id,
                    hour_start=hour0 + timedelta(hours=h),
                    io_ops=max(0, int(round(hourly * jitter))),
                )
            )
    write_iops(samples, iops_path)

    sizes_path = dest / "volumes.csv"
    sizes = {
        volume_id: int(spec.volume_size_gb[v] * _GB)
        for v, volume_id in enumerate(spec.volume_ids)
    }
    write_volume_sizes(sizes, sizes_path)

    manifest_path = dest / "manifest.csv"
    manifest.sort(key=lambda pair: pair[0])
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("file_id,label\n")
        for file_id, label in manifest:
            fh.write(f"{file_id},{label}\n")

    return GenResult(
        root=dest,
        corpus_path=corpus_path,
        iops_path=iops_path,
        sizes_path=sizes_path,
        manifest_path=manifest_path,
        n_files=len(records),
        n_sensitive=n_sensitive,
        n_non_sensitive=n_non,
        n_binary=n_binary,
        volume_ids=spec.volume_ids,
    )


def read_manifest(path: str | Path) -> dict[str, str]:
    """Parse manifest.csv into {file_id: label}."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "file_id,label":
            raise ValueError(f"bad manifest header: {header!r}")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            file_id, _, label = line.rpartition(",")
            out[file_id] = label
    return out
