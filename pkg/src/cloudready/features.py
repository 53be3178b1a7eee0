"""Metadata feature extraction: name, path, extension, size, time blocks.

A fitted FeatureSpec freezes the vocabulary, folder list, extension list,
and numeric min/max statistics of a training set. Encoding any file against
that spec yields a vector of length |vocabulary| + |folders| + |extensions|
+ 5 with every component in [0, 1]:

  name block       token counts of the cleaned file-name stem, each scaled
                   by the token's maximum training count
  path block       binary: bit i set iff folder i is a prefix of the path
  extension block  one-hot over the training extensions
  size block       file_size, bytes_used, min-max normalized
  time block       (last_accessed, changed, last_modified) minus created,
                   in days, negatives clamped to 0, min-max normalized

Out-of-vocabulary tokens, unseen folders, and unseen extensions contribute
nothing; numeric values outside the training range are clipped.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from .scan import FileMeta, extension_of
from .textprep import STOP_WORDS_VERSION, name_tokens

__all__ = [
    "FeatureSpec",
    "FeatureSpecError",
    "fit_spec",
    "encode",
    "encode_batch",
    "name_stem",
    "stem_tokens",
    "folder_prefixes",
    "time_deltas_days",
    "clamped_time",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_labels",
    "read_labels",
]

SECONDS_PER_DAY = 86400.0
NUMERIC_COUNT = 5  # file_size, bytes_used, three time differences

FEATURE_SPEC_FORMAT = "feature-spec"
FEATURE_SPEC_VERSION = 1


class FeatureSpecError(ValueError):
    pass


def name_stem(file_name: str) -> str:
    """File name with its extension (from the last dot) removed."""
    ext = extension_of(file_name)
    return file_name[: len(file_name) - len(ext)] if ext else file_name


def stem_tokens(file_name: str) -> list[str]:
    """Cleaned tokens of the name stem: digits deleted, punctuation split,
    stop words dropped. "Report 2015!.docx" -> ["report"]."""
    return name_tokens(name_stem(file_name))


def folder_prefixes(path: str, depth: int) -> list[str]:
    """Folder prefixes of a '/'-separated relative path, up to ``depth``.

    "a/b/c" at depth 2 -> ["a", "a/b"]. The root (empty path) has none.
    """
    if not path:
        return []
    parts = path.split("/")
    return ["/".join(parts[: i + 1]) for i in range(min(depth, len(parts)))]


def time_deltas_days(meta: FileMeta) -> tuple[float, float, float]:
    """(last_accessed, changed, last_modified) minus created, in days.

    Negative differences (clock skew, created after access) clamp to 0.
    """
    created = meta.created
    return (
        max((meta.last_accessed - created).total_seconds(), 0.0) / SECONDS_PER_DAY,
        max((meta.changed - created).total_seconds(), 0.0) / SECONDS_PER_DAY,
        max((meta.last_modified - created).total_seconds(), 0.0) / SECONDS_PER_DAY,
    )


def clamped_time(meta: FileMeta) -> bool:
    """True when any raw time difference was negative (clamped by encoding)."""
    created = meta.created
    return (
        meta.last_accessed < created
        or meta.changed < created
        or meta.last_modified < created
    )


@dataclass(frozen=True)
class FeatureSpec:
    """Frozen encoding recipe fitted on a training set."""

    vocabulary: tuple[str, ...]
    name_scale: tuple[int, ...]  # per-token max training count, >= 1
    folder_list: tuple[str, ...]
    extension_list: tuple[str, ...]
    depth: int
    numeric_stats: tuple[tuple[float, float], ...]  # 5 (min, max) pairs
    reference_time: datetime | None = None

    def __post_init__(self):
        if self.depth < 1:
            raise FeatureSpecError(f"depth must be >= 1, got {self.depth}")
        if len(self.numeric_stats) != NUMERIC_COUNT:
            raise FeatureSpecError(
                f"numeric_stats must have {NUMERIC_COUNT} entries, got {len(self.numeric_stats)}"
            )
        if len(self.name_scale) != len(self.vocabulary):
            raise FeatureSpecError("name_scale must parallel vocabulary")
        for mn, mx in self.numeric_stats:
            if mn > mx:
                raise FeatureSpecError(f"numeric stat has min {mn} > max {mx}")

    @property
    def total_length(self) -> int:
        return (
            len(self.vocabulary)
            + len(self.folder_list)
            + len(self.extension_list)
            + NUMERIC_COUNT
        )

    def block_sizes(self) -> dict[str, int]:
        return {
            "name": len(self.vocabulary),
            "path": len(self.folder_list),
            "extension": len(self.extension_list),
            "numeric": NUMERIC_COUNT,
        }

    def vocab_index(self) -> dict[str, int]:
        return {t: i for i, t in enumerate(self.vocabulary)}

    def folder_index(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.folder_list)}

    def extension_index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.extension_list)}

    def to_json(self) -> str:
        obj = {
            "format": FEATURE_SPEC_FORMAT,
            "version": FEATURE_SPEC_VERSION,
            "stop_words_version": STOP_WORDS_VERSION,
            "depth": self.depth,
            "vocabulary": list(self.vocabulary),
            "name_scale": list(self.name_scale),
            "folder_list": list(self.folder_list),
            "extension_list": list(self.extension_list),
            "numeric_stats": [[mn, mx] for mn, mx in self.numeric_stats],
            "reference_time": self.reference_time.isoformat() if self.reference_time else None,
        }
        return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "FeatureSpec":
        obj = json.loads(text)
        if obj.get("format") != FEATURE_SPEC_FORMAT:
            raise FeatureSpecError(f"not a feature spec document: format={obj.get('format')!r}")
        if obj.get("version") != FEATURE_SPEC_VERSION:
            raise FeatureSpecError(f"unsupported feature spec version {obj.get('version')!r}")
        ref = obj.get("reference_time")
        return cls(
            vocabulary=tuple(obj["vocabulary"]),
            name_scale=tuple(int(s) for s in obj["name_scale"]),
            folder_list=tuple(obj["folder_list"]),
            extension_list=tuple(obj["extension_list"]),
            depth=int(obj["depth"]),
            numeric_stats=tuple((float(mn), float(mx)) for mn, mx in obj["numeric_stats"]),
            reference_time=datetime.fromisoformat(ref) if ref else None,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FeatureSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def fingerprint(self) -> str:
        """sha256 over the canonical serialized form; stored in model files
        so a model is never applied to vectors from a different spec."""
        canonical = json.dumps(
            json.loads(self.to_json()), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _numeric_values(meta: FileMeta) -> tuple[float, float, float, float, float]:
    da, dc, dm = time_deltas_days(meta)
    return (float(meta.file_size), float(meta.bytes_used), da, dc, dm)


def fit_spec(
    files: Sequence[FileMeta],
    d: int = 2,
    min_token_count: int = 1,
    max_vocabulary: int | None = None,
) -> FeatureSpec:
    """Fit the encoding recipe on a training set.

    ``min_token_count`` drops name tokens with fewer total occurrences
    (default keeps all). ``max_vocabulary`` caps the vocabulary to the
    tokens appearing in the most files (document frequency, ties broken
    alphabetically) — used to keep clustering tractable. Lists are sorted,
    so fitting is deterministic.
    """
    if not files:
        raise FeatureSpecError("cannot fit a feature spec on an empty training set")
    if d < 1:
        raise FeatureSpecError(f"depth must be >= 1, got {d}")

    token_totals: dict[str, int] = {}
    token_max: dict[str, int] = {}
    token_df: dict[str, int] = {}
    folders: set[str] = set()
    extensions: set[str] = set()
    numeric = np.empty((len(files), NUMERIC_COUNT), dtype=np.float64)
    latest: datetime | None = None

    for i, meta in enumerate(files):
        counts: dict[str, int] = {}
        for tok in stem_tokens(meta.file_name):
            counts[tok] = counts.get(tok, 0) + 1
        for tok, c in counts.items():
            token_totals[tok] = token_totals.get(tok, 0) + c
            token_df[tok] = token_df.get(tok, 0) + 1
            if c > token_max.get(tok, 0):
                token_max[tok] = c
        folders.update(folder_prefixes(meta.path, d))
        if meta.extension:
            extensions.add(meta.extension)
        numeric[i] = _numeric_values(meta)
        if latest is None or meta.last_modified > latest:
            latest = meta.last_modified

    kept = [t for t, total in token_totals.items() if total >= min_token_count]
    if max_vocabulary is not None and len(kept) > max_vocabulary:
        kept.sort(key=lambda t: (-token_df[t], t))
        kept = kept[:max_vocabulary]
    vocabulary = tuple(sorted(kept))
    name_scale = tuple(token_max[t] for t in vocabulary)
    mins = numeric.min(axis=0)
    maxs = numeric.max(axis=0)
    stats = tuple((float(mn), float(mx)) for mn, mx in zip(mins, maxs))
    return FeatureSpec(
        vocabulary=vocabulary,
        name_scale=name_scale,
        folder_list=tuple(sorted(folders)),
        extension_list=tuple(sorted(extensions)),
        depth=d,
        numeric_stats=stats,
        reference_time=latest,
    )


def _normalize(value: float, mn: float, mx: float) -> float:
    if mx <= mn:
        return 0.0
    if value <= mn:
        return 0.0
    if value >= mx:
        return 1.0
    return (value - mn) / (mx - mn)


def encode(meta: FileMeta, spec: FeatureSpec) -> np.ndarray:
    """Encode one file as a dense [0,1] vector of length spec.total_length."""
    out = np.zeros(spec.total_length, dtype=np.float64)
    vocab_idx = spec.vocab_index()
    counts: dict[int, int] = {}
    for tok in stem_tokens(meta.file_name):
        j = vocab_idx.get(tok)
        if j is not None:
            counts[j] = counts.get(j, 0) + 1
    for j, c in counts.items():
        out[j] = min(c / spec.name_scale[j], 1.0)

    base = len(spec.vocabulary)
    folder_idx = spec.folder_index()
    for prefix in folder_prefixes(meta.path, spec.depth):
        j = folder_idx.get(prefix)
        if j is not None:
            out[base + j] = 1.0

    base += len(spec.folder_list)
    ext_j = spec.extension_index().get(meta.extension)
    if ext_j is not None:
        out[base + ext_j] = 1.0

    base += len(spec.extension_list)
    for k, value in enumerate(_numeric_values(meta)):
        mn, mx = spec.numeric_stats[k]
        out[base + k] = _normalize(value, mn, mx)
    return out


def encode_batch(files: Sequence[FileMeta], spec: FeatureSpec) -> sparse.csr_matrix:
    """Encode files row-wise into a CSR matrix (row i = encode(files[i]))."""
    vocab_idx = spec.vocab_index()
    folder_idx = spec.folder_index()
    ext_idx = spec.extension_index()
    n_vocab = len(spec.vocabulary)
    n_folder = len(spec.folder_list)
    ext_base = n_vocab + n_folder
    num_base = ext_base + len(spec.extension_list)

    data: list[float] = []
    cols: list[int] = []
    indptr = [0]
    for meta in files:
        counts: dict[int, int] = {}
        for tok in stem_tokens(meta.file_name):
            j = vocab_idx.get(tok)
            if j is not None:
                counts[j] = counts.get(j, 0) + 1
        for j in sorted(counts):
            cols.append(j)
            data.append(min(counts[j] / spec.name_scale[j], 1.0))
        hits = sorted(
            folder_idx[p]
            for p in folder_prefixes(meta.path, spec.depth)
            if p in folder_idx
        )
        for j in hits:
            cols.append(n_vocab + j)
            data.append(1.0)
        ej = ext_idx.get(meta.extension)
        if ej is not None:
            cols.append(ext_base + ej)
            data.append(1.0)
        for k, value in enumerate(_numeric_values(meta)):
            mn, mx = spec.numeric_stats[k]
            v = _normalize(value, mn, mx)
            if v != 0.0:
                cols.append(num_base + k)
                data.append(v)
        indptr.append(len(cols))

    return sparse.csr_matrix(
        (
            np.asarray(data, dtype=np.float64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(indptr, dtype=np.int64),
        ),
        shape=(len(files), spec.total_length),
    )


def write_matrix_csv(matrix: sparse.spmatrix, path: str | Path) -> None:
    """Persist a matrix as sparse triplets: header then row,col,value lines."""
    coo = sparse.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("row,col,value\n")
        for i in order:
            fh.write(f"{coo.row[i]},{coo.col[i]},{float(coo.data[i])!r}\n")


def read_matrix_csv(path: str | Path, shape: tuple[int, int]) -> sparse.csr_matrix:
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "row,col,value":
            raise FeatureSpecError(f"{path}: bad matrix header {header!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise FeatureSpecError(f"{path}: line {lineno}: expected 3 columns")
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            vals.append(float(parts[2]))
    return sparse.csr_matrix(
        (vals, (rows, cols)), shape=shape, dtype=np.float64
    )


def write_labels(labels: Sequence[str], path: str | Path) -> None:
    """Label column file: one label string per line, aligned with matrix rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for lab in labels:
            fh.write(f"{lab}\n")


def read_labels(path: str | Path) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]
