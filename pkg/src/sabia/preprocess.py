"""Text cleaning chain for the feature-based models.

Pipeline order is fixed: strip HTML tags, lowercase, lexicon normalization,
punctuation removal (keeping intra-word apostrophes and hyphens), numeral
removal, whitespace tokenization, stopword removal with a retention list,
rule-based lemmatization with an exception dictionary. The hybrid encoder
model consumes raw text instead and does not use this chain.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .lexicon import Lexicon

#: Context-bearing words kept even though they appear in stopword lists.
BASE_RETAIN = frozenset({"not", "no", "never", "off", "on", "clean", "quit"})

_TAG_RE = re.compile(r"<[^>]*>")
_APOSTROPHES = {"'", "’", "-"}


def _read_lines(name: str) -> list[str]:
    ref = resources.files("sabia.data").joinpath(name)
    lines = ref.read_text(encoding="utf-8").splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return frozenset(_read_lines("stopwords.txt"))


@lru_cache(maxsize=None)
def function_words() -> frozenset[str]:
    """The 150-word English function-word list behind `detect_english`."""
    return frozenset(_read_lines("function_words.txt"))


@lru_cache(maxsize=None)
def default_lemma_exceptions() -> dict[str, str]:
    pairs = {}
    for line in _read_lines("lemma_exceptions.txt"):
        form, lemma = line.split()
        pairs[form] = lemma
    return pairs


@dataclass(frozen=True)
class PreprocessConfig:
    """Knobs for the cleaning chain.

    `retain_words` is unioned with all lexicon surfaces and canonicals inside
    `clean`, so domain terms always survive the stopword stage.
    """

    english_threshold: float = 0.10
    retain_words: frozenset = BASE_RETAIN
    lemma_exceptions: dict = field(default_factory=default_lemma_exceptions)


def detect_english(text: str, threshold: float = 0.10, words: frozenset | None = None) -> bool:
    """True iff the fraction of tokens found in the function-word list meets
    the threshold. Empty text is never English. The detector is pluggable by
    passing a different word set."""
    tokens = text.split()
    if not tokens:
        return False
    words = words if words is not None else function_words()
    hits = sum(1 for tok in tokens if tok.strip(".,!?;:'\"").lower() in words)
    return hits / len(tokens) >= threshold


def _strip_punct(text: str) -> str:
    """Replace punctuation and symbols with spaces, keeping intra-word
    apostrophes and hyphens."""
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if unicodedata.category(ch)[0] in ("P", "S"):
            if ch in _APOSTROPHES and 0 < i < n - 1 and text[i - 1].isalnum() and text[i + 1].isalnum():
                out.append(ch)
            else:
                out.append(" ")
        else:
            out.append(ch)
    return "".join(out)


def lemmatize(token: str, exceptions: dict[str, str] | None = None) -> str:
    """Exception lookup first, then suffix rules with a minimum stem length
    of 3: ies->y, the es rule table, s-drop, ing/ed-drop with doubled-consonant
    repair."""
    if exceptions is None:
        exceptions = default_lemma_exceptions()
    hit = exceptions.get(token)
    if hit is not None:
        return hit

    if token.endswith("ies"):
        stem = token[:-3] + "y"
        if len(stem) >= 3:
            return stem
    if token.endswith("sses"):
        return token[:-2]
    for suffix in ("xes", "ches", "shes", "zes", "oes"):
        if token.endswith(suffix):
            stem = token[:-2]
            if len(stem) >= 3:
                return stem
            break
    if token.endswith("es"):
        stem = token[:-1]
        if len(stem) >= 3:
            return stem
    if token.endswith("s") and not token.endswith(("ss", "us", "is")):
        stem = token[:-1]
        if len(stem) >= 3:
            return stem
    for suffix in ("ing", "ed"):
        if token.endswith(suffix):
            stem = token[: -len(suffix)]
            if len(stem) >= 3:
                if stem[-1] == stem[-2] and stem[-1] not in "lsze":
                    stem = stem[:-1]
                return stem
            break
    return token


def clean(text: str, lexicon: Lexicon, config: PreprocessConfig | None = None) -> list[str]:
    """Run the full cleaning chain and return the token list."""
    if config is None:
        config = PreprocessConfig()
    t = _TAG_RE.sub(" ", text)
    t = t.lower()
    t = lexicon.normalize_text(t)
    t = _strip_punct(t)

    retain = set(config.retain_words) | lexicon.surfaces() | lexicon.canonicals()
    stop = stopwords()
    tokens = []
    for tok in t.split():
        if tok.isdigit():
            continue
        if tok in stop and tok not in retain:
            continue
        tokens.append(lemmatize(tok, config.lemma_exceptions))
    return tokens
