"""Sparse TF-IDF vectors and pretrained word-embedding tables."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse


class FeatureError(ValueError):
    """Raised for malformed feature inputs or files."""


@dataclass(frozen=True)
class TfidfModel:
    """Fitted vocabulary and smoothed idf weights.

    idf(t) = ln((1 + N) / (1 + df(t))) + 1, so idf >= 1 for every token.
    Vocabulary columns are assigned in lexicographic token order.
    """

    vocabulary: dict[str, int]
    idf: np.ndarray
    n_docs: int


def fit_tfidf(docs: list[list[str]]) -> TfidfModel:
    if not docs:
        raise FeatureError("fit_tfidf needs at least one document")
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc))
    if not df:
        raise FeatureError("fit_tfidf: all documents are empty")
    tokens = sorted(df)
    n = len(docs)
    idf = np.array([math.log((1 + n) / (1 + df[t])) + 1.0 for t in tokens])
    return TfidfModel({t: j for j, t in enumerate(tokens)}, idf, n)


def transform_tfidf(model: TfidfModel, doc: list[str]) -> np.ndarray:
    """Raw-count tf * idf, L2-normalized. Unseen tokens are ignored; a doc of
    only unseen tokens maps to the zero vector."""
    vec = np.zeros(len(model.vocabulary))
    for token, count in Counter(doc).items():
        j = model.vocabulary.get(token)
        if j is not None:
            vec[j] = count * model.idf[j]
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def transform_matrix(model: TfidfModel, docs: list[list[str]]) -> sparse.csr_matrix:
    """Stacked transform_tfidf rows as a CSR matrix."""
    data, indices, indptr = [], [], [0]
    for doc in docs:
        cols = {}
        for token, count in Counter(doc).items():
            j = model.vocabulary.get(token)
            if j is not None:
                cols[j] = count * model.idf[j]
        norm = math.sqrt(sum(v * v for v in cols.values()))
        for j in sorted(cols):
            indices.append(j)
            data.append(cols[j] / norm if norm > 0 else 0.0)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (data, indices, indptr), shape=(len(docs), len(model.vocabulary))
    )


@dataclass(frozen=True)
class EmbeddingTable:
    """Whole-token lookup table; no subword composition."""

    dim: int = 300
    vectors: dict[str, np.ndarray] = None
    oov_policy: str = "zeros"  # or "mean"

    def __post_init__(self):
        if self.oov_policy not in ("zeros", "mean"):
            raise FeatureError(f"unknown oov_policy: {self.oov_policy!r}")
        mean = (
            np.mean(list(self.vectors.values()), axis=0)
            if self.vectors
            else np.zeros(self.dim)
        )
        object.__setattr__(self, "_mean", mean)

    def lookup(self, token: str) -> np.ndarray:
        vec = self.vectors.get(token)
        if vec is not None:
            return vec
        return self._mean if self.oov_policy == "mean" else np.zeros(self.dim)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings(path: str | Path, dim: int, oov_policy: str = "zeros") -> EmbeddingTable:
    """Parse a text embedding file, one "token v1 ... v_dim" line each.

    Lines with the wrong arity are skipped with a warning naming the line
    number; the first occurrence of a token wins.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embedding file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    bad: list[int] = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                bad.append(lineno)
                continue
            token = parts[0]
            if token in vectors:
                continue
            try:
                vectors[token] = np.array([float(x) for x in parts[1:]])
            except ValueError:
                bad.append(lineno)
    if bad:
        warnings.warn(f"{path}: rejected {len(bad)} line(s) with wrong arity: {bad[:10]}")
    if not vectors:
        raise FeatureError(f"{path}: no valid embedding lines")
    return EmbeddingTable(dim=dim, vectors=vectors, oov_policy=oov_policy)


def toy_embeddings_path() -> Path:
    """Filesystem path of the bundled 50-dim toy embedding file."""
    ref = resources.files("sabia.data").joinpath("toy_embeddings_50d.txt")
    with resources.as_file(ref) as path:
        return Path(path)
