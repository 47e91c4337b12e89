"""Opioid keyword dictionary: formal terms, slang, misspellings, coded phrases.

Matching is case-insensitive, longest-first over whitespace-token n-grams and
tolerates punctuation stuck to token edges. Rewriting via `normalize_text`
touches only misspelling/slang/abbreviation entries; formal terms and coded
phrases are flagged by `match_keywords` but never rewritten.
"""

from __future__ import annotations

import csv
import unicodedata
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

KINDS = frozenset({"formal", "slang", "misspelling", "coded", "abbreviation"})

#: Kinds whose surfaces `normalize_text` replaces with their canonical form.
REWRITE_KINDS = frozenset({"misspelling", "slang", "abbreviation"})


class LexiconError(ValueError):
    """Raised for malformed lexicon files or entries."""


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    canonical: str
    kind: str

    def __post_init__(self):
        if not self.surface:
            raise LexiconError("lexicon surface must be nonempty")
        if not self.canonical:
            raise LexiconError(f"entry {self.surface!r}: canonical must be nonempty")
        if self.kind not in KINDS:
            raise LexiconError(f"entry {self.surface!r}: unknown kind {self.kind!r}")
        if self.kind == "formal" and self.surface != self.canonical:
            raise LexiconError(
                f"formal entry {self.surface!r} must have canonical equal to surface"
            )


@dataclass(frozen=True)
class Match:
    surface: str
    kind: str
    offset: int


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _token_core(tok: str) -> tuple[str, int, int]:
    """Strip punctuation/symbols from the ends of a token.

    Returns (core, start_trim, end_trim) where the trims count stripped chars.
    """
    start, end = 0, len(tok)
    while start < end and _is_punct(tok[start]):
        start += 1
    while end > start and _is_punct(tok[end - 1]):
        end -= 1
    return tok[start:end], start, len(tok) - end


@dataclass(frozen=True)
class Lexicon:
    entries: tuple[LexiconEntry, ...]
    index: dict[str, LexiconEntry] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        index = {}
        for e in self.entries:
            if e.surface in index:
                raise LexiconError(f"duplicate surface: {e.surface!r}")
            index[e.surface] = e
        object.__setattr__(self, "index", index)
        max_tokens = max((len(e.surface.split()) for e in self.entries), default=1)
        object.__setattr__(self, "_max_phrase_tokens", max_tokens)

    def surfaces(self) -> set[str]:
        return set(self.index)

    def canonicals(self) -> set[str]:
        return {e.canonical for e in self.entries}

    def normalize_text(self, text: str) -> str:
        return normalize_text(self, text)

    def match_keywords(self, text: str) -> list[Match]:
        return match_keywords(self, text)


def _scan(lexicon: Lexicon, text: str):
    """Yield (entry, core_start, core_end) for non-overlapping longest matches.

    Candidates are built from token cores; a match requires the exact lowercase
    surface to appear in the original text between the outer cores (so phrases
    must be single-spaced and free of interior punctuation).
    """
    spans = []  # (core_start, core_end) per whitespace token, cores may be empty
    pos = 0
    for tok in text.split():
        start = text.index(tok, pos)
        core, lead, trail = _token_core(tok)
        spans.append((start + lead, start + len(tok) - trail))
        pos = start + len(tok)

    max_n = lexicon._max_phrase_tokens
    i = 0
    while i < len(spans):
        matched = False
        for n in range(min(max_n, len(spans) - i), 0, -1):
            start = spans[i][0]
            end = spans[i + n - 1][1]
            if end <= start:
                continue
            candidate = text[start:end].lower()
            entry = lexicon.index.get(candidate)
            if entry is not None:
                yield entry, start, end
                i += n
                matched = True
                break
        if not matched:
            i += 1


def match_keywords(lexicon: Lexicon, text: str) -> list[Match]:
    """All case-insensitive longest matches, left to right, non-overlapping.

    Offsets index the original text at the start of the matched surface.
    """
    return [Match(e.surface, e.kind, start) for e, start, _ in _scan(lexicon, text)]


def normalize_text(lexicon: Lexicon, text: str) -> str:
    """Replace matched misspelling/slang/abbreviation surfaces with canonicals.

    Formal and coded entries are left intact. Idempotent: canonicals are never
    themselves rewritable surfaces with a different canonical.
    """
    out = []
    pos = 0
    for entry, start, end in _scan(lexicon, text):
        if entry.kind in REWRITE_KINDS and entry.canonical != entry.surface:
            out.append(text[pos:start])
            out.append(entry.canonical)
            pos = end
    out.append(text[pos:])
    return "".join(out)


def load_lexicon(path: str | Path) -> Lexicon:
    """Load a lexicon CSV with header surface,canonical,kind.

    Duplicate surfaces keep the first row and emit a warning. Surfaces and
    canonicals are lowercased on load.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"lexicon file not found: {path}")
    entries: list[LexiconEntry] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or {"surface", "canonical", "kind"} - set(reader.fieldnames):
            raise LexiconError(f"{path}: expected header surface,canonical,kind")
        for lineno, row in enumerate(reader, 2):
            surface = (row["surface"] or "").strip().lower()
            canonical = (row["canonical"] or "").strip().lower()
            kind = (row["kind"] or "").strip().lower()
            if surface in seen:
                warnings.warn(f"{path}:{lineno}: duplicate surface {surface!r} ignored")
                continue
            try:
                entry = LexiconEntry(surface=surface, canonical=canonical, kind=kind)
            except LexiconError as e:
                raise LexiconError(f"{path}:{lineno}: {e}") from None
            entries.append(entry)
            seen.add(surface)
    return Lexicon(tuple(entries))


def default_lexicon() -> Lexicon:
    """The bundled starter lexicon."""
    ref = resources.files("sabia.data").joinpath("lexicon.csv")
    with resources.as_file(ref) as path:
        return load_lexicon(path)
