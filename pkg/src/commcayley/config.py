"""Configuration and corpus ingestion for the command-line front end.

Config files are flat UTF-8 ``key=value`` lines; command-line flags
override file values.  Word corpora are one word per line with ``#``
comments and blank lines ignored.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .words import Word, WordSyntaxError, parse_word

CACHE_ENV_VAR = "COMMCAYLEY_CACHE"

_DEFAULTS = {
    "rank": 2,
    "L": 6,
    "depth": 3,
    "word_cap": 256,
    "seed": 0,
}

_INT_KEYS = {"rank", "L", "depth", "word_cap", "seed"}


@dataclass
class Config:
    rank: int = 2
    L: int = 6
    depth: int = 3
    word_cap: int = 256
    seed: int = 0
    patterns: str | None = None  # pattern bank path
    cache_dir: str | None = None

    def __post_init__(self):
        for name in ("rank", "L", "depth", "word_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def load_config_file(path: str | Path) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: {key} must be an integer") from None
        else:
            values[key] = value
    return values


def resolve_config(file_values: dict | None, flag_values: dict) -> Config:
    """defaults < config file < explicit flags."""
    merged = dict(_DEFAULTS)
    if file_values:
        merged.update({k: v for k, v in file_values.items() if v is not None})
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    known = {f for f in Config.__dataclass_fields__}
    return Config(**{k: v for k, v in merged.items() if k in known})


def resolve_cache_dir(config: Config) -> Path | None:
    env = os.environ.get(CACHE_ENV_VAR)
    chosen = env or config.cache_dir
    return Path(chosen) if chosen else None


# -- corpus and bank files -------------------------------------------------------


@dataclass
class IngestReport:
    words: list[Word] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    total_lines: int = 0
    duplicates: int = 0


def ingest_corpus(path: str | Path, rank: int, *, strict: bool = False) -> IngestReport:
    """Parse, reduce and deduplicate a word file, preserving file order.

    Parse failures are recorded per line with their column and skipped;
    ``strict`` turns the first failure into an exception.
    """
    report = IngestReport()
    seen: set[tuple] = set()
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        report.total_lines += 1
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            w = parse_word(line, rank)
        except WordSyntaxError as exc:
            record = {"line": lineno, "column": exc.column, "error": str(exc)}
            if strict:
                raise WordSyntaxError(
                    f"{path}:{lineno}:{exc.column}: {exc}", exc.column
                ) from None
            report.errors.append(record)
            continue
        if w.letters in seen:
            report.duplicates += 1
            continue
        seen.add(w.letters)
        report.words.append(w)
    return report


def load_pattern_bank(path: str | Path, rank: int):
    """Pattern files share the corpus format; every word must be a
    usable pattern (reduced, length >= 2)."""
    from .quasimorphism import Pattern

    report = ingest_corpus(path, rank, strict=True)
    return [Pattern(w) for w in report.words]


def load_loop_file(path: str | Path, rank: int):
    """One loop per line as ``(a,b)(c,d)...``; ``#`` comments allowed."""
    from .loops import parse_loop

    loops = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        loops.append(parse_loop(line, rank))
    return loops
