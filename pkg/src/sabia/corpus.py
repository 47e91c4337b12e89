"""Core data model: labeled posts, corpus I/O, statistics, and stratified splitting."""

from __future__ import annotations

import csv
import json
import math
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Iterator


class CorpusError(ValueError):
    """Raised for malformed corpus files or contract violations."""


class Label(IntEnum):
    """The five behavior classes. Integer codes are a serialization contract."""

    DEALER = 0
    ACTIVE_USER = 1
    RECOVERED_USER = 2
    PRESCRIPTION_USER = 3
    NON_USER = 4

    @property
    def canonical_name(self) -> str:
        return _LABEL_NAMES[self]

    @classmethod
    def from_name(cls, name: str) -> "Label":
        """Parse a label name case-insensitively ("dealer", "ActiveUser", "active_user")."""
        key = re.sub(r"[\s_-]+", "", name).casefold()
        try:
            return _LABEL_LOOKUP[key]
        except KeyError:
            raise CorpusError(f"unknown label string: {name!r}") from None


_LABEL_NAMES = {
    Label.DEALER: "Dealer",
    Label.ACTIVE_USER: "ActiveUser",
    Label.RECOVERED_USER: "RecoveredUser",
    Label.PRESCRIPTION_USER: "PrescriptionUser",
    Label.NON_USER: "NonUser",
}

_LABEL_LOOKUP = {name.casefold(): lab for lab, name in _LABEL_NAMES.items()}

#: Class distribution of the full Reddit-sourced dataset these tools were built
#: around (not distributable). A stats report can be compared against this when
#: the real dataset is supplied.
REFERENCE_CLASS_COUNTS = {
    Label.ACTIVE_USER: 1877,
    Label.DEALER: 1499,
    Label.NON_USER: 1391,
    Label.PRESCRIPTION_USER: 685,
    Label.RECOVERED_USER: 312,
}

#: Headline corpus-size figures for the same reference dataset.
REFERENCE_TOTALS = {
    "n_posts": 5764,
    "n_sentences": 22767,
    "n_words": 350207,
    "vocab_size": 15134,
}


@dataclass(frozen=True)
class AnnotatedPost:
    """One social-media post, optionally carrying a behavior label."""

    id: str
    subreddit: str
    created_utc: int
    text: str
    label: Label | None = None

    def __post_init__(self):
        if not self.id:
            raise CorpusError("post id must be nonempty")
        if not self.text.strip():
            raise CorpusError(f"post {self.id!r}: text is empty after trimming")


@dataclass(frozen=True)
class Corpus:
    """An ordered collection of posts with unique ids. Immutable after construction."""

    posts: tuple[AnnotatedPost, ...]

    def __post_init__(self):
        object.__setattr__(self, "posts", tuple(self.posts))
        seen = set()
        for post in self.posts:
            if post.id in seen:
                raise CorpusError(f"duplicate post id: {post.id!r}")
            seen.add(post.id)

    def __len__(self) -> int:
        return len(self.posts)

    def __iter__(self) -> Iterator[AnnotatedPost]:
        return iter(self.posts)

    def __getitem__(self, i: int) -> AnnotatedPost:
        return self.posts[i]

    @property
    def all_labeled(self) -> bool:
        return all(p.label is not None for p in self.posts)

    def texts(self) -> list[str]:
        return [p.text for p in self.posts]

    def labels(self) -> list[Label]:
        """Labels in corpus order; raises if any post is unlabeled."""
        out = []
        for p in self.posts:
            if p.label is None:
                raise CorpusError(f"post {p.id!r} is unlabeled")
            out.append(p.label)
        return out


@dataclass(frozen=True)
class CorpusStats:
    n_posts: int
    n_sentences: int
    avg_sentences_per_post: float
    n_words: int
    vocab_size: int
    avg_words_per_sentence: float
    class_counts: dict[Label, int]
    class_fractions: dict[Label, float]

    def to_dict(self) -> dict:
        return {
            "n_posts": self.n_posts,
            "n_sentences": self.n_sentences,
            "avg_sentences_per_post": self.avg_sentences_per_post,
            "n_words": self.n_words,
            "vocab_size": self.vocab_size,
            "avg_words_per_sentence": self.avg_words_per_sentence,
            "class_counts": {lab.canonical_name: n for lab, n in self.class_counts.items()},
            "class_fractions": {lab.canonical_name: f for lab, f in self.class_fractions.items()},
            "matches_reference_distribution": self.class_counts == REFERENCE_CLASS_COUNTS,
        }


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 80
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise CorpusError(f"train_fraction must be in (0,1), got {self.train_fraction}")


_JSONL_KEYS = ("id", "subreddit", "created_utc", "text", "label")


def _post_from_record(record: dict, where: str) -> AnnotatedPost:
    if "id" not in record or "text" not in record:
        raise CorpusError(f"{where}: record must have 'id' and 'text'")
    label = record.get("label")
    if label is not None and label != "":
        try:
            label = Label.from_name(str(label))
        except CorpusError as e:
            raise CorpusError(f"{where}: {e}") from None
    else:
        label = None
    created = record.get("created_utc") or 0
    try:
        created = int(created)
    except (TypeError, ValueError):
        raise CorpusError(f"{where}: created_utc is not an integer: {created!r}") from None
    try:
        return AnnotatedPost(
            id=str(record["id"]),
            subreddit=str(record.get("subreddit") or ""),
            created_utc=created,
            text=str(record["text"]),
            label=label,
        )
    except CorpusError as e:
        raise CorpusError(f"{where}: {e}") from None


def load_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Load a corpus from JSONL or CSV. `format` defaults to the file suffix."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus file not found: {path}")
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format: {format!r}")

    posts = []
    if format == "jsonl":
        with path.open(encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise CorpusError(f"{path}:{lineno}: invalid JSON ({e.msg})") from None
                if not isinstance(record, dict):
                    raise CorpusError(f"{path}:{lineno}: record is not an object")
                posts.append(_post_from_record(record, f"{path}:{lineno}"))
    else:
        with path.open(encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            for lineno, row in enumerate(reader, 2):  # line 1 is the header
                posts.append(_post_from_record(row, f"{path}:{lineno}"))

    try:
        return Corpus(tuple(posts))
    except CorpusError as e:
        raise CorpusError(f"{path}: {e}") from None


def save_corpus(corpus: Corpus, path: str | Path, format: str | None = None) -> None:
    """Write a corpus as JSONL (one object per line) or RFC-4180 CSV, UTF-8."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise CorpusError(f"unknown corpus format: {format!r}")

    if format == "jsonl":
        with path.open("w", encoding="utf-8") as f:
            for p in corpus:
                record = {
                    "id": p.id,
                    "subreddit": p.subreddit,
                    "created_utc": p.created_utc,
                    "text": p.text,
                }
                if p.label is not None:
                    record["label"] = p.label.canonical_name
                f.write(json.dumps(record, ensure_ascii=False) + "\n")
    else:
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(_JSONL_KEYS)
            for p in corpus:
                writer.writerow(
                    [
                        p.id,
                        p.subreddit,
                        p.created_utc,
                        p.text,
                        p.label.canonical_name if p.label is not None else "",
                    ]
                )


_SENTENCE_SPLIT = re.compile(r"[.!?]+")


def split_sentences(text: str) -> list[str]:
    """Maximal nonblank segments between runs of sentence terminators {. ! ?}."""
    return [seg for seg in _SENTENCE_SPLIT.split(text) if seg.strip()]


def split_words(text: str) -> list[str]:
    """Whitespace tokens with sentence punctuation stripped from the ends."""
    words = []
    for tok in text.split():
        word = tok.strip(".!?")
        if word:
            words.append(word)
    return words


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Corpus-level sentence/word/vocabulary counts and class distribution."""
    n_posts = len(corpus)
    n_sentences = 0
    n_words = 0
    vocab: set[str] = set()
    class_counts = {lab: 0 for lab in Label}
    for post in corpus:
        n_sentences += len(split_sentences(post.text))
        words = split_words(post.text)
        n_words += len(words)
        vocab.update(w.lower() for w in words)
        if post.label is not None:
            class_counts[post.label] += 1

    n_labeled = sum(class_counts.values())
    fractions = {
        lab: (count / n_labeled if n_labeled else 0.0) for lab, count in class_counts.items()
    }
    return CorpusStats(
        n_posts=n_posts,
        n_sentences=n_sentences,
        avg_sentences_per_post=n_sentences / n_posts if n_posts else 0.0,
        n_words=n_words,
        vocab_size=len(vocab),
        avg_words_per_sentence=n_words / n_sentences if n_sentences else 0.0,
        class_counts=class_counts,
        class_fractions=fractions,
    )


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def stratified_split(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus]:
    """Split into (train, test) by seeded shuffle, per class when stratified.

    Train size per class is round(train_fraction * class size), half away from
    zero. Membership is deterministic for a given seed; output order follows
    the input corpus.
    """
    for p in corpus:
        if p.label is None:
            raise CorpusError(f"cannot split: post {p.id!r} is unlabeled")
    if len(corpus) == 0:
        raise CorpusError("cannot split an empty corpus")

    rng = random.Random(spec.seed)
    train_idx: set[int] = set()

    if spec.stratified:
        by_class: dict[Label, list[int]] = {}
        for i, p in enumerate(corpus):
            by_class.setdefault(p.label, []).append(i)
        for lab in sorted(by_class):
            idx = by_class[lab]
            if len(idx) < 2:
                raise CorpusError(
                    f"stratified split needs >=2 posts per class; "
                    f"{lab.canonical_name} has {len(idx)}"
                )
            shuffled = idx[:]
            rng.shuffle(shuffled)
            n_train = _round_half_away(spec.train_fraction * len(idx))
            train_idx.update(shuffled[:n_train])
    else:
        order = list(range(len(corpus)))
        rng.shuffle(order)
        n_train = _round_half_away(spec.train_fraction * len(corpus))
        train_idx.update(order[:n_train])

    train = [p for i, p in enumerate(corpus) if i in train_idx]
    test = [p for i, p in enumerate(corpus) if i not in train_idx]
    return Corpus(tuple(train)), Corpus(tuple(test))
