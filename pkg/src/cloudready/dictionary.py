"""Dictionary-driven content scanning and three-valued sensitivity labeling.

A dictionary is an ordered list of categories, each either a regular
expression (matched against raw text) or a keyword list (matched against the
stop-word-filtered token stream). Files whose content cannot be extracted
get the Unknown label and are excluded from training downstream.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .textprep import content_tokens

__all__ = [
    "SensitivityLabel",
    "Category",
    "Dictionary",
    "ContentScanResult",
    "LabelRule",
    "DictionaryError",
    "DEFAULT_CATEGORIES",
    "compile_dictionary",
    "load_dictionary_config",
    "scan_content",
    "extract_text",
    "scan_file",
    "label_file",
    "luhn_valid",
]


class SensitivityLabel(enum.Enum):
    SENSITIVE = "Sensitive"
    NON_SENSITIVE = "NonSensitive"
    UNKNOWN = "Unknown"


class DictionaryError(ValueError):
    pass


@dataclass(frozen=True)
class Category:
    """One compiled dictionary category.

    ``kind`` is "pattern" (regex over raw text, optionally post-validated)
    or "keyword-list" (lowercase whole-token matches).
    """

    name: str
    kind: str
    patterns: tuple[str, ...]
    _regexes: tuple[re.Pattern, ...] = ()
    _keywords: frozenset[str] = frozenset()
    _validator: Callable[[str], bool] | None = None

    def count_matches(self, text: str, tokens: Sequence[str]) -> int:
        if self.kind == "keyword-list":
            return sum(1 for t in tokens if t in self._keywords)
        count = 0
        for rx in self._regexes:
            if self._validator is None:
                count += sum(1 for _ in rx.finditer(text))
            else:
                count += sum(1 for m in rx.finditer(text) if self._validator(m.group(0)))
        return count


@dataclass(frozen=True)
class Dictionary:
    categories: tuple[Category, ...]

    def category_names(self) -> list[str]:
        return [c.name for c in self.categories]


@dataclass(frozen=True)
class ContentScanResult:
    """Outcome of content-scanning one file.

    ``total_tokens`` counts the stop-word-filtered token stream; match
    counts are per category. crawled=False forces all counts to zero.
    """

    file_id: str
    crawled: bool
    total_tokens: int
    matches: Mapping[str, int]

    def match_total(self) -> int:
        return sum(self.matches.values())


@dataclass(frozen=True)
class LabelRule:
    """How scan counts become a label.

    any-match: one hit anywhere makes the file Sensitive. threshold: the
    file is Sensitive when matches / max(total_tokens, 1) meets the
    threshold fraction.
    """

    mode: str = "any-match"
    threshold: float = 0.0

    def __post_init__(self):
        if self.mode not in ("any-match", "threshold"):
            raise DictionaryError(f"unknown label rule mode {self.mode!r}")
        if not 0.0 <= self.threshold <= 1.0:
            raise DictionaryError(f"threshold must be in [0,1], got {self.threshold}")


def luhn_valid(digits: str) -> bool:
    """Luhn checksum over a string of decimal digits."""
    total = 0
    parity = len(digits) % 2
    for i, ch in enumerate(digits):
        d = ord(ch) - 48
        if i % 2 == parity:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


def _credit_card_valid(matched: str) -> bool:
    digits = re.sub(r"[ -]", "", matched)
    return 13 <= len(digits) <= 19 and luhn_valid(digits)


# Default categories. The shipped patterns are pragmatic defaults, fully
# overridable via config:
#  - email: local@domain.tld with common local-part characters
#  - phone: North-American with optional +1/1 country code; separators
#    required so that bare digit runs (ids, card numbers) do not match
#  - SSN: 3-2-4 digit groups with dashes
#  - credit card: 13-19 digits, optional space/dash separators, Luhn-checked
#  - keywords: matched as lowercase whole tokens
DEFAULT_CATEGORIES: tuple[dict, ...] = (
    {
        "name": "email",
        "kind": "pattern",
        "patterns": [r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b"],
    },
    {
        "name": "phone",
        "kind": "pattern",
        "patterns": [r"(?<!\d)(?:\+?1[-. ])?(?:\(\d{3}\)[-. ]?|\d{3}[-. ])\d{3}[-. ]\d{4}(?!\d)"],
    },
    {
        "name": "ssn",
        "kind": "pattern",
        "patterns": [r"(?<![\d-])\d{3}-\d{2}-\d{4}(?![\d-])"],
    },
    {
        "name": "credit_card",
        "kind": "pattern",
        "patterns": [r"(?<![\d-])\d(?:[ -]?\d){12,18}(?![\d-])"],
        "_validator": "credit_card",
    },
    {
        "name": "keywords",
        "kind": "keyword-list",
        "patterns": ["confidential", "proprietary", "ssn", "salary", "password"],
    },
)

_VALIDATORS: dict[str, Callable[[str], bool]] = {"credit_card": _credit_card_valid}


def compile_dictionary(spec: Sequence[Mapping] | None = None) -> Dictionary:
    """Compile a category list into a Dictionary; None/empty means defaults.

    Raises DictionaryError naming the offending category for duplicate
    names, unknown kinds, non-compiling regexes, or empty keywords.
    """
    if not spec:
        spec = DEFAULT_CATEGORIES
    categories: list[Category] = []
    seen: set[str] = set()
    for entry in spec:
        name = str(entry.get("name", "")).strip()
        if not name:
            raise DictionaryError("category missing a name")
        if name in seen:
            raise DictionaryError(f"duplicate category name {name!r}")
        seen.add(name)
        kind = entry.get("kind", "pattern")
        patterns = entry.get("patterns", [])
        if kind not in ("pattern", "keyword-list"):
            raise DictionaryError(f"category {name!r}: unknown kind {kind!r}")
        if not patterns:
            raise DictionaryError(f"category {name!r}: empty pattern list")
        if kind == "pattern":
            regexes = []
            for pat in patterns:
                try:
                    regexes.append(re.compile(pat))
                except re.error as exc:
                    raise DictionaryError(
                        f"category {name!r}: pattern {pat!r} does not compile: {exc}"
                    ) from exc
            validator_key = entry.get("_validator")
            validator = _VALIDATORS[validator_key] if validator_key else None
            categories.append(
                Category(
                    name=name,
                    kind="pattern",
                    patterns=tuple(str(p) for p in patterns),
                    _regexes=tuple(regexes),
                    _validator=validator,
                )
            )
        else:
            keywords = []
            for token in patterns:
                token = str(token).strip().lower()
                if not token:
                    raise DictionaryError(f"category {name!r}: empty keyword")
                keywords.append(token)
            categories.append(
                Category(
                    name=name,
                    kind="keyword-list",
                    patterns=tuple(keywords),
                    _keywords=frozenset(keywords),
                )
            )
    return Dictionary(categories=tuple(categories))


def load_dictionary_config(path: str | Path) -> list[dict]:
    """Read a ``[[category]]`` config file (TOML or JSON) into a spec list."""
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".json":
        doc = json.loads(data.decode("utf-8"))
    else:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        doc = tomllib.loads(data.decode("utf-8"))
    if isinstance(doc, dict):
        entries = doc.get("category", [])
    else:
        entries = doc
    if not isinstance(entries, list):
        raise DictionaryError(f"{path}: expected a list of [[category]] entries")
    return [dict(e) for e in entries]


def scan_content(text: str, dictionary: Dictionary, file_id: str = "") -> ContentScanResult:
    """Count per-category matches in extracted text (crawled=True result)."""
    tokens = content_tokens(text)
    matches = {c.name: c.count_matches(text, tokens) for c in dictionary.categories}
    return ContentScanResult(
        file_id=file_id, crawled=True, total_tokens=len(tokens), matches=matches
    )


def uncrawled(dictionary: Dictionary, file_id: str = "") -> ContentScanResult:
    """The result for a file whose content could not be extracted."""
    return ContentScanResult(
        file_id=file_id,
        crawled=False,
        total_tokens=0,
        matches={c.name: 0 for c in dictionary.categories},
    )


# Extensions whose bytes are read as UTF-8 text directly.
_PLAIN_TEXT_EXTENSIONS = frozenset(
    (
        ".txt", ".text", ".md", ".rst", ".log", ".csv", ".tsv", ".json",
        ".yaml", ".yml", ".ini", ".cfg", ".conf", ".toml", ".py", ".sh",
        ".sql", ".tex",
    )
)
# Markup whose tags are stripped before matching.
_MARKUP_EXTENSIONS = frozenset((".html", ".htm", ".xml", ".xhtml", ".svg"))

_TAG = re.compile(r"<[^>]*>")

Extractor = Callable[[bytes], str]


def extract_text(
    data: bytes, extension: str, extractors: Mapping[str, Extractor] | None = None
) -> tuple[str, bool]:
    """Extract plain text from file bytes; (\"\", False) when unsupported.

    ``extractors`` maps lowercase extensions (with dot) to callables for
    formats beyond the built-in plain-text and markup families; an extractor
    that raises yields the not-crawled outcome rather than an error.
    """
    extension = extension.lower()
    if extractors and extension in extractors:
        try:
            return extractors[extension](data), True
        except Exception:
            return "", False
    if extension in _PLAIN_TEXT_EXTENSIONS:
        try:
            return data.decode("utf-8"), True
        except UnicodeDecodeError:
            return "", False
    if extension in _MARKUP_EXTENSIONS:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            return "", False
        return _TAG.sub(" ", text), True
    return "", False


def scan_file(
    fs_path: str | Path,
    extension: str,
    dictionary: Dictionary,
    file_id: str = "",
    extractors: Mapping[str, Extractor] | None = None,
) -> ContentScanResult:
    """Read, extract, and scan one on-disk file."""
    try:
        data = Path(fs_path).read_bytes()
    except OSError:
        return uncrawled(dictionary, file_id)
    text, crawled = extract_text(data, extension, extractors)
    if not crawled:
        return uncrawled(dictionary, file_id)
    return scan_content(text, dictionary, file_id)


def label_file(result: ContentScanResult, rule: LabelRule) -> SensitivityLabel:
    """Apply a label rule to one scan result."""
    if not result.crawled:
        return SensitivityLabel.UNKNOWN
    total_matches = result.match_total()
    if rule.mode == "any-match":
        return SensitivityLabel.SENSITIVE if total_matches > 0 else SensitivityLabel.NON_SENSITIVE
    fraction = total_matches / max(result.total_tokens, 1)
    return SensitivityLabel.SENSITIVE if fraction >= rule.threshold else SensitivityLabel.NON_SENSITIVE


def result_to_json(result: ContentScanResult) -> str:
    obj = {
        "file_id": result.file_id,
        "crawled": result.crawled,
        "total_tokens": result.total_tokens,
        "matches": dict(result.matches),
    }
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def result_from_json(line: str) -> ContentScanResult:
    obj = json.loads(line)
    return ContentScanResult(
        file_id=obj["file_id"],
        crawled=bool(obj["crawled"]),
        total_tokens=int(obj["total_tokens"]),
        matches={str(k): int(v) for k, v in obj["matches"].items()},
    )
