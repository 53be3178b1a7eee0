"""Filesystem scanning: walk volume roots into file-metadata records.

A "volume" here is a directory declared in config; records carry paths
relative to that root. Corpora persist as JSON-Lines, IOPS series as CSV.
"""

from __future__ import annotations

import csv
import json
import os
import stat as statmod
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "FileMeta",
    "IopsSample",
    "SkippedFile",
    "ScanResult",
    "CorpusFormatError",
    "IopsFormatError",
    "scan_volume",
    "write_corpus",
    "read_corpus",
    "load_iops",
    "write_iops",
    "load_volume_sizes",
    "write_volume_sizes",
]


@dataclass(frozen=True)
class FileMeta:
    """Metadata of one regular file on a volume.

    ``path`` is the directory part only (volume-root-relative, '/'-separated,
    empty at root) and never contains the file name. ``extension`` is the
    substring from the last '.' of the name, lowercased, empty if the name
    has no dot. ``created_substituted`` flags records whose filesystem did
    not report a creation time (last_modified was substituted).
    """

    volume_id: str
    file_name: str
    extension: str
    path: str
    last_accessed: datetime
    created: datetime
    changed: datetime
    last_modified: datetime
    file_size: int
    bytes_used: int
    user_folder: str
    created_substituted: bool = False

    def file_id(self) -> str:
        """Stable identifier used in predictions and reports."""
        if self.path:
            return f"{self.volume_id}/{self.path}/{self.file_name}"
        return f"{self.volume_id}/{self.file_name}"


@dataclass(frozen=True)
class IopsSample:
    volume_id: str
    hour_start: datetime
    io_ops: int


@dataclass(frozen=True)
class SkippedFile:
    path: str
    reason: str


@dataclass
class ScanResult:
    """Records plus the skip report; records are sorted by (path, file_name)."""

    records: list[FileMeta] = field(default_factory=list)
    skipped: list[SkippedFile] = field(default_factory=list)


class CorpusFormatError(ValueError):
    pass


class IopsFormatError(ValueError):
    pass


def extension_of(file_name: str) -> str:
    """Substring from the last '.' in the name, lowercased; '' if no dot."""
    idx = file_name.rfind(".")
    if idx == -1:
        return ""
    return file_name[idx:].lower()


def _utc(ts: float) -> datetime:
    return datetime.fromtimestamp(ts, tz=timezone.utc)


def _meta_from_stat(volume_id: str, rel_dir: str, name: str, st: os.stat_result) -> FileMeta:
    blocks = getattr(st, "st_blocks", None)
    bytes_used = blocks * 512 if blocks is not None else st.st_size
    birth = getattr(st, "st_birthtime", None)
    substituted = birth is None
    created = _utc(birth) if birth is not None else _utc(st.st_mtime)
    first_segment = rel_dir.split("/", 1)[0] if rel_dir else ""
    return FileMeta(
        volume_id=volume_id,
        file_name=name,
        extension=extension_of(name),
        path=rel_dir,
        last_accessed=_utc(st.st_atime),
        created=created,
        changed=_utc(st.st_ctime),
        last_modified=_utc(st.st_mtime),
        file_size=st.st_size,
        bytes_used=bytes_used,
        user_folder=first_segment,
        created_substituted=substituted,
    )


def scan_volume(root: str | Path, volume_id: str) -> ScanResult:
    """Walk ``root`` recursively and emit one FileMeta per regular file.

    Symlinks are not followed (directory links are not descended, file links
    are not records). An unreadable root raises; an unreadable file becomes a
    SkippedFile entry. Output is sorted by (path, file_name) so repeated
    scans of an unchanged tree are identical.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectoryError(f"volume root is not a readable directory: {root}")
    # Fail loudly up front if the root itself cannot be listed.
    os.listdir(root)

    result = ScanResult()
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames.sort()
        rel_dir = os.path.relpath(dirpath, root)
        rel_dir = "" if rel_dir == "." else rel_dir.replace(os.sep, "/")
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            try:
                st = os.stat(full, follow_symlinks=False)
            except OSError as exc:
                result.skipped.append(SkippedFile(path=full, reason=str(exc)))
                continue
            if not statmod.S_ISREG(st.st_mode):
                continue  # symlinks, sockets, fifos: not regular files
            result.records.append(_meta_from_stat(volume_id, rel_dir, name, st))
    result.records.sort(key=lambda m: (m.path, m.file_name))
    return result


_CORPUS_FIELDS = (
    "volume_id",
    "file_name",
    "extension",
    "path",
    "last_accessed",
    "created",
    "changed",
    "last_modified",
    "file_size",
    "bytes_used",
    "user_folder",
    "created_substituted",
)
_TIMESTAMP_FIELDS = ("last_accessed", "created", "changed", "last_modified")


def meta_to_json(record: FileMeta) -> str:
    """One corpus line (no trailing newline), timestamps as RFC 3339."""
    obj = {
        "volume_id": record.volume_id,
        "file_name": record.file_name,
        "extension": record.extension,
        "path": record.path,
        "last_accessed": record.last_accessed.isoformat(),
        "created": record.created.isoformat(),
        "changed": record.changed.isoformat(),
        "last_modified": record.last_modified.isoformat(),
        "file_size": record.file_size,
        "bytes_used": record.bytes_used,
        "user_folder": record.user_folder,
        "created_substituted": record.created_substituted,
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def _parse_timestamp(value: str, fieldname: str, lineno: int) -> datetime:
    try:
        dt = datetime.fromisoformat(value)
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"line {lineno}: bad timestamp in {fieldname!r}: {value!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def meta_from_json(line: str, lineno: int = 1) -> FileMeta:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line {lineno}: not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError(f"line {lineno}: expected a JSON object")
    missing = [f for f in _CORPUS_FIELDS if f not in obj and f != "created_substituted"]
    if missing:
        raise CorpusFormatError(f"line {lineno}: missing field(s) {', '.join(missing)}")
    try:
        file_size = int(obj["file_size"])
        bytes_used = int(obj["bytes_used"])
    except (TypeError, ValueError) as exc:
        raise CorpusFormatError(f"line {lineno}: file_size/bytes_used must be integers") from exc
    if file_size < 0 or bytes_used < 0:
        raise CorpusFormatError(f"line {lineno}: negative file_size or bytes_used")
    return FileMeta(
        volume_id=str(obj["volume_id"]),
        file_name=str(obj["file_name"]),
        extension=str(obj["extension"]),
        path=str(obj["path"]),
        last_accessed=_parse_timestamp(obj["last_accessed"], "last_accessed", lineno),
        created=_parse_timestamp(obj["created"], "created", lineno),
        changed=_parse_timestamp(obj["changed"], "changed", lineno),
        last_modified=_parse_timestamp(obj["last_modified"], "last_modified", lineno),
        file_size=file_size,
        bytes_used=bytes_used,
        user_folder=str(obj["user_folder"]),
        created_substituted=bool(obj.get("created_substituted", False)),
    )


def write_corpus(records: Iterable[FileMeta], dest: str | Path) -> int:
    """Write records as JSON-Lines; returns the number of lines written."""
    count = 0
    with open(dest, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(meta_to_json(record))
            fh.write("\n")
            count += 1
    return count


def read_corpus(src: str | Path) -> list[FileMeta]:
    records = []
    with open(src, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            records.append(meta_from_json(line, lineno))
    return records


IOPS_HEADER = ("volume_id", "hour_start", "io_ops")


def load_iops(src: str | Path) -> list[IopsSample]:
    """Parse the IOPS CSV; grouped by volume_id, sorted by hour_start."""
    samples: list[IopsSample] = []
    seen: set[tuple[str, datetime]] = set()
    with open(src, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IopsFormatError("empty IOPS file (missing header)") from None
        if tuple(h.strip() for h in header) != IOPS_HEADER:
            raise IopsFormatError(f"bad IOPS header: expected {','.join(IOPS_HEADER)}, got {','.join(header)}")
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise IopsFormatError(f"row {rownum}: expected 3 columns, got {len(row)}")
            volume_id = row[0].strip()
            try:
                hour_start = datetime.fromisoformat(row[1].strip())
            except ValueError as exc:
                raise IopsFormatError(f"row {rownum}: bad hour_start {row[1]!r}") from exc
            if hour_start.tzinfo is None:
                hour_start = hour_start.replace(tzinfo=timezone.utc)
            try:
                io_ops = int(row[2])
            except ValueError as exc:
                raise IopsFormatError(f"row {rownum}: io_ops must be an integer, got {row[2]!r}") from exc
            if io_ops < 0:
                raise IopsFormatError(f"row {rownum}: negative io_ops {io_ops}")
            key = (volume_id, hour_start)
            if key in seen:
                raise IopsFormatError(f"row {rownum}: duplicate sample for ({volume_id}, {hour_start.isoformat()})")
            seen.add(key)
            samples.append(IopsSample(volume_id=volume_id, hour_start=hour_start, io_ops=io_ops))
    samples.sort(key=lambda s: (s.volume_id, s.hour_start))
    return samples


def write_iops(samples: Sequence[IopsSample], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(IOPS_HEADER)
        for s in samples:
            writer.writerow([s.volume_id, s.hour_start.isoformat(), s.io_ops])


VOLUME_SIZES_HEADER = ("volume_id", "provisioned_bytes")


def load_volume_sizes(src: str | Path) -> dict[str, int]:
    """Parse the provisioned-capacity CSV into {volume_id: bytes}."""
    sizes: dict[str, int] = {}
    with open(src, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IopsFormatError("empty volume-sizes file (missing header)") from None
        if tuple(h.strip() for h in header) != VOLUME_SIZES_HEADER:
            raise IopsFormatError(
                f"bad volume-sizes header: expected {','.join(VOLUME_SIZES_HEADER)}, got {','.join(header)}"
            )
        for rownum, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise IopsFormatError(f"row {rownum}: expected 2 columns, got {len(row)}")
            volume_id = row[0].strip()
            try:
                size = int(row[1])
            except ValueError as exc:
                raise IopsFormatError(f"row {rownum}: provisioned_bytes must be an integer, got {row[1]!r}") from exc
            if size <= 0:
                raise IopsFormatError(f"row {rownum}: provisioned_bytes must be positive, got {size}")
            if volume_id in sizes:
                raise IopsFormatError(f"row {rownum}: duplicate volume_id {volume_id!r}")
            sizes[volume_id] = size
    return sizes


def write_volume_sizes(sizes: dict[str, int], dest: str | Path) -> None:
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(VOLUME_SIZES_HEADER)
        for volume_id in sorted(sizes):
            writer.writerow([volume_id, sizes[volume_id]])


def with_volume(record: FileMeta, volume_id: str) -> FileMeta:
    """Copy of a record reassigned to another volume (used by generators)."""
    return replace(record, volume_id=volume_id)
