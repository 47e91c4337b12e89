"""Deep-learning baselines: embedding-input CNN and BiLSTM classifiers.

Both consume sequences of pretrained word vectors (the embeddings stay
frozen) produced by the cleaning chain, padded with zero vectors to a fixed
length, and are trained with plain SGD on cross-entropy.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .corpus import Corpus, Label
from .features import EmbeddingTable
from .lexicon import Lexicon, default_lexicon
from .preprocess import PreprocessConfig, clean

CHECKPOINT_FORMAT = "sabia-neural"
CHECKPOINT_VERSION = 1

N_CLASSES = len(Label)


class NeuralError(ValueError):
    pass


@dataclass
class NeuralConfig:
    arch: str  # "cnn" or "bilstm"
    embedding: EmbeddingTable
    learning_rate: float = 0.1  # tuned default; tests favor 0.01
    epochs: int = 5
    batch_size: int = 32
    lstm_units: int = 128
    filters: int = 128
    kernel_size: int = 5
    max_len: int = 128
    seed: int = 80

    def __post_init__(self):
        if self.arch not in ("cnn", "bilstm"):
            raise NeuralError(f"unknown arch {self.arch!r}; expected 'cnn' or 'bilstm'")
        for name in ("epochs", "batch_size", "lstm_units", "filters", "kernel_size", "max_len"):
            if getattr(self, name) <= 0:
                raise NeuralError(f"{name} must be positive")


class CnnTextClassifier(nn.Module):
    """One valid 1-D convolution, ReLU, global max pool over time, FC."""

    def __init__(self, embed_dim: int, filters: int, kernel_size: int, n_classes: int = N_CLASSES):
        super().__init__()
        self.conv = nn.Conv1d(embed_dim, filters, kernel_size)
        self.fc = nn.Linear(filters, n_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:  # x: [batch, time, dim]
        h = torch.relu(self.conv(x.permute(0, 2, 1)))  # [batch, filters, time-k+1]
        h = h.max(dim=2).values  # [batch, filters]
        return self.fc(h)


class BiLstmTextClassifier(nn.Module):
    """BiLSTM; final forward state concatenated with final backward state, FC."""

    def __init__(self, embed_dim: int, units: int, n_classes: int = N_CLASSES):
        super().__init__()
        self.lstm = nn.LSTM(embed_dim, units, batch_first=True, bidirectional=True)
        self.fc = nn.Linear(2 * units, n_classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:  # x: [batch, time, dim]
        _, (h_n, _) = self.lstm(x)
        h = torch.cat([h_n[0], h_n[1]], dim=1)  # [batch, 2*units]
        return self.fc(h)


@dataclass
class NeuralModel:
    config: NeuralConfig
    net: nn.Module
    embed_dim: int
    #: Path of the embedding file the model was trained with, when known.
    embedding_source: str | None = None


def embed_tokens(table: EmbeddingTable, tokens: list[str], max_len: int) -> np.ndarray:
    """[max_len, dim] matrix: token vectors, zero-vector padded/truncated."""
    out = np.zeros((max_len, table.dim))
    for i, tok in enumerate(tokens[:max_len]):
        out[i] = table.lookup(tok)
    return out


def _corpus_tensor(
    config: NeuralConfig, corpus: Corpus, lexicon: Lexicon, pre: PreprocessConfig
) -> tuple[torch.Tensor, list[list[str]]]:
    docs = [clean(p.text, lexicon, pre) for p in corpus]
    # Valid convolution needs at least kernel_size positions.
    length = max(config.max_len, config.kernel_size)
    X = np.stack([embed_tokens(config.embedding, doc, length) for doc in docs])
    return torch.tensor(X, dtype=torch.float32), docs


def build_network(config: NeuralConfig, embed_dim: int) -> nn.Module:
    if config.arch == "cnn":
        return CnnTextClassifier(embed_dim, config.filters, config.kernel_size)
    return BiLstmTextClassifier(embed_dim, config.lstm_units)


def train_neural(
    config: NeuralConfig,
    corpus: Corpus,
    lexicon: Lexicon | None = None,
    preprocess_config: PreprocessConfig | None = None,
) -> NeuralModel:
    """SGD training on cross-entropy; deterministic for a given seed."""
    if len(corpus) == 0:
        raise NeuralError("empty training corpus")
    lexicon = lexicon or default_lexicon()
    pre = preprocess_config or PreprocessConfig()

    torch.manual_seed(config.seed)
    X, docs = _corpus_tensor(config, corpus, lexicon, pre)
    if all(not doc for doc in docs):
        raise NeuralError("all posts are empty after cleaning")
    y = torch.tensor([int(lab) for lab in corpus.labels()])

    net = build_network(config, config.embedding.dim)
    optimizer = torch.optim.SGD(net.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    shuffler = random.Random(config.seed)

    net.train()
    order = list(range(len(corpus)))
    for _ in range(config.epochs):
        shuffler.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            optimizer.zero_grad()
            logits = net(X[batch])
            loss = loss_fn(logits, y[batch])
            loss.backward()
            optimizer.step()
    net.eval()
    return NeuralModel(config=config, net=net, embed_dim=config.embedding.dim)


def predict_neural(
    model: NeuralModel,
    posts,
    lexicon: Lexicon | None = None,
    preprocess_config: PreprocessConfig | None = None,
) -> list[Label]:
    """Argmax over logits, ties toward the lower class code."""
    posts = list(posts)
    if not posts:
        return []
    lexicon = lexicon or default_lexicon()
    pre = preprocess_config or PreprocessConfig()
    config = model.config
    length = max(config.max_len, config.kernel_size)
    docs = [clean(p.text, lexicon, pre) for p in posts]
    X = torch.tensor(
        np.stack([embed_tokens(config.embedding, doc, length) for doc in docs]),
        dtype=torch.float32,
    )
    model.net.eval()
    with torch.no_grad():
        logits = model.net(X).numpy()
    return [Label(int(code)) for code in np.argmax(logits, axis=1)]


def save_neural(model: NeuralModel, path: str | Path) -> None:
    """Weight checkpoint with embedded config and label order."""
    config = model.config
    torch.save(
        {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "arch": config.arch,
            "config": {
                "learning_rate": config.learning_rate,
                "epochs": config.epochs,
                "batch_size": config.batch_size,
                "lstm_units": config.lstm_units,
                "filters": config.filters,
                "kernel_size": config.kernel_size,
                "max_len": config.max_len,
                "seed": config.seed,
            },
            "label_order": [lab.canonical_name for lab in Label],
            "embed_dim": model.embed_dim,
            "embedding_source": model.embedding_source,
            "state_dict": model.net.state_dict(),
        },
        path,
    )


def load_neural(path: str | Path, embedding: EmbeddingTable) -> NeuralModel:
    blob = torch.load(path, weights_only=False)
    if blob.get("format") != CHECKPOINT_FORMAT or blob.get("version") != CHECKPOINT_VERSION:
        raise NeuralError(f"{path}: not a neural model checkpoint")
    if embedding.dim != blob["embed_dim"]:
        raise NeuralError(
            f"embedding dim {embedding.dim} does not match checkpoint dim {blob['embed_dim']}"
        )
    config = NeuralConfig(arch=blob["arch"], embedding=embedding, **blob["config"])
    net = build_network(config, blob["embed_dim"])
    net.load_state_dict(blob["state_dict"])
    net.eval()
    return NeuralModel(
        config=config,
        net=net,
        embed_dim=blob["embed_dim"],
        embedding_source=blob.get("embedding_source"),
    )
