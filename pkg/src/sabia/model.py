"""SABIA: pretrained-encoder embeddings -> BiLSTM -> three parallel CNNs.

The classifier runs raw text through a subword tokenizer and a bidirectional
transformer encoder, feeds the per-token vectors to a BiLSTM, extracts local
n-gram features with three parallel 1-D convolutions (kernel sizes 2, 3, 4),
global-max-pools each, concatenates the pooled features, and classifies
through dropout plus an affine layer. Everything, encoder included, is
fine-tuned end to end with Adam on cross-entropy.

Shape chain for the stock configuration (batch b, sequence length 128,
encoder width 768, LSTM hidden 128, 128 channels per kernel):

    ids [b,128] -> encoder [b,128,768] -> BiLSTM [b,128,256]
        -> permute [b,256,128] -> conv_k [b,128,128-k+1] -> pool 3x[b,128]
        -> concat [b,384] -> logits [b,5]

A "tiny" checkpoint (random-init small encoder with a bundled vocabulary) is
selectable so the whole pipeline runs offline at desk scale; only the encoder
token width changes, the head keeps the shapes above.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from .corpus import Corpus, CorpusError, Label

CHECKPOINT_FORMAT = "sabia-checkpoint"
CHECKPOINT_VERSION = 1

#: Config.checkpoint value selecting the bundled random-init test encoder.
TINY_CHECKPOINT = "tiny"

N_CLASSES = len(Label)


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SabiaConfig:
    """Hyperparameters; defaults are the tuned values for the full model.

    Optimizer is Adam and the loss is cross-entropy; both are fixed. Text is
    padded/truncated to max_len. With the tiny encoder the recorded
    learning_rate is usually too small for a random-init encoder; callers
    override it (the CLI uses 1e-3 when -\\-encoder tiny is selected).
    """

    checkpoint: str = "bert-base-uncased"
    max_len: int = 128
    batch_size: int = 16
    learning_rate: float = 2e-5
    epochs: int = 4
    dropout: float = 0.3
    lstm_hidden: int = 128
    lstm_layers: int = 1
    bidirectional: bool = True
    kernels: tuple[int, ...] = (2, 3, 4)
    cnn_channels: int = 128
    seed: int = 80
    class_weights: bool = False
    #: Mask padded positions before max pooling. Off by default: the stock
    #: architecture pools over the full sequence, pads included.
    mask_pooling: bool = False
    tiny_hidden: int = 64
    tiny_layers: int = 2

    @property
    def concat_width(self) -> int:
        return self.cnn_channels * len(self.kernels)


def tiny_vocab_path() -> Path:
    ref = resources.files("sabia.data").joinpath("tiny_vocab.txt")
    with resources.as_file(ref) as path:
        return Path(path)


def _attention_heads(hidden: int) -> int:
    heads = max(1, hidden // 16)
    while hidden % heads:
        heads -= 1
    return heads


def _build_encoder_and_tokenizer(config: SabiaConfig):
    if config.checkpoint == TINY_CHECKPOINT:
        from transformers import BertConfig, BertModel, BertTokenizer

        tokenizer = BertTokenizer(str(tiny_vocab_path()))
        enc_cfg = BertConfig(
            vocab_size=tokenizer.vocab_size,
            hidden_size=config.tiny_hidden,
            num_hidden_layers=config.tiny_layers,
            num_attention_heads=_attention_heads(config.tiny_hidden),
            intermediate_size=2 * config.tiny_hidden,
            max_position_embeddings=max(512, config.max_len),
            pad_token_id=tokenizer.pad_token_id,
        )
        return BertModel(enc_cfg), tokenizer
    from transformers import AutoModel, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(config.checkpoint)
    encoder = AutoModel.from_pretrained(config.checkpoint)
    return encoder, tokenizer


def _window_keep(mask: torch.Tensor, kernel: int) -> torch.Tensor:
    """[batch, 1, L-k+1] bool: conv window contains at least one real token."""
    pooled = F.max_pool1d(mask.float().unsqueeze(1), kernel, stride=1)
    return pooled > 0


class SabiaHead(nn.Module):
    """BiLSTM over token vectors, three parallel convolutions, pooled concat,
    dropout, affine classifier."""

    def __init__(
        self,
        input_dim: int,
        lstm_hidden: int = 128,
        lstm_layers: int = 1,
        bidirectional: bool = True,
        kernels: tuple[int, ...] = (2, 3, 4),
        channels: int = 128,
        dropout: float = 0.3,
        n_classes: int = N_CLASSES,
    ):
        super().__init__()
        self.lstm = nn.LSTM(
            input_dim,
            lstm_hidden,
            num_layers=lstm_layers,
            batch_first=True,
            bidirectional=bidirectional,
        )
        width = lstm_hidden * (2 if bidirectional else 1)
        self.convs = nn.ModuleList(nn.Conv1d(width, channels, k) for k in kernels)
        self.dropout = nn.Dropout(dropout)
        self.fc = nn.Linear(channels * len(kernels), n_classes)

    def forward(self, hidden: torch.Tensor, mask: torch.Tensor | None = None) -> torch.Tensor:
        return self.forward_parts(hidden, mask)[0]

    def forward_parts(self, hidden, mask=None):
        """Returns (logits, intermediates) with every stage of the chain."""
        seq, _ = self.lstm(hidden)  # [b, L, 2H]
        permuted = seq.permute(0, 2, 1)  # [b, 2H, L]
        conv_maps, pooled = [], []
        for conv in self.convs:
            c = torch.relu(conv(permuted))  # [b, C, L-k+1]
            if mask is not None:
                c = c.masked_fill(~_window_keep(mask, conv.kernel_size[0]), float("-inf"))
            conv_maps.append(c)
            pooled.append(c.max(dim=2).values)  # [b, C]
        concat = torch.cat(pooled, dim=1)  # [b, C*len(kernels)]
        logits = self.fc(self.dropout(concat))
        return logits, {
            "lstm": seq,
            "permuted": permuted,
            "conv": conv_maps,
            "pooled": pooled,
            "concat": concat,
        }


class SabiaModel(nn.Module):
    """Encoder plus SabiaHead; carries its tokenizer and label order."""

    kind = "sabia"

    def __init__(self, config: SabiaConfig, encoder=None, tokenizer=None):
        super().__init__()
        if encoder is None or tokenizer is None:
            encoder, tokenizer = _build_encoder_and_tokenizer(config)
        self.config = config
        self.encoder = encoder
        self.tokenizer = tokenizer
        self.label_order = list(Label)
        self.data_hash: str | None = None
        self.head = SabiaHead(
            input_dim=encoder.config.hidden_size,
            lstm_hidden=config.lstm_hidden,
            lstm_layers=config.lstm_layers,
            bidirectional=config.bidirectional,
            kernels=config.kernels,
            channels=config.cnn_channels,
            dropout=config.dropout,
        )

    def forward(self, input_ids, attention_mask):
        return self.forward_parts(input_ids, attention_mask)[0]

    def forward_parts(self, input_ids, attention_mask):
        hidden = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state
        mask = attention_mask if self.config.mask_pooling else None
        logits, parts = self.head.forward_parts(hidden, mask)
        parts["encoder"] = hidden
        return logits, parts

    def forward_from_embeds(self, inputs_embeds, attention_mask):
        hidden = self.encoder(
            inputs_embeds=inputs_embeds, attention_mask=attention_mask
        ).last_hidden_state
        mask = attention_mask if self.config.mask_pooling else None
        return self.head(hidden, mask)


class EncoderClassifier(nn.Module):
    """Plain fine-tuned encoder with dropout + affine over the start token."""

    kind = "encoder"

    def __init__(self, config: SabiaConfig, encoder=None, tokenizer=None):
        super().__init__()
        if encoder is None or tokenizer is None:
            encoder, tokenizer = _build_encoder_and_tokenizer(config)
        self.config = config
        self.encoder = encoder
        self.tokenizer = tokenizer
        self.label_order = list(Label)
        self.data_hash: str | None = None
        self.dropout = nn.Dropout(config.dropout)
        self.fc = nn.Linear(encoder.config.hidden_size, N_CLASSES)

    def forward(self, input_ids, attention_mask):
        hidden = self.encoder(
            input_ids=input_ids, attention_mask=attention_mask
        ).last_hidden_state
        return self.fc(self.dropout(hidden[:, 0]))

    def forward_from_embeds(self, inputs_embeds, attention_mask):
        hidden = self.encoder(
            inputs_embeds=inputs_embeds, attention_mask=attention_mask
        ).last_hidden_state
        return self.fc(self.dropout(hidden[:, 0]))


def encode(model, texts: list[str]) -> tuple[torch.Tensor, torch.Tensor]:
    """Tokenize a batch: start/separator specials added, padded/truncated to
    max_len. Returns (input_ids, attention_mask), each [batch, max_len]."""
    enc = model.tokenizer(
        list(texts),
        padding="max_length",
        truncation=True,
        max_length=model.config.max_len,
        return_tensors="pt",
    )
    return enc["input_ids"], enc["attention_mask"]


@dataclass
class FineTuneResult:
    model: nn.Module
    loss_history: list[float]
    dev_accuracy: list[float] | None = None


def _require_trainable(corpus: Corpus) -> list[Label]:
    if len(corpus) == 0:
        raise CorpusError("empty training corpus")
    labels = corpus.labels()
    missing = [lab.canonical_name for lab in Label if lab not in set(labels)]
    if missing:
        raise CorpusError(f"training corpus is missing label class(es): {missing}")
    return labels


def corpus_hash(corpus: Corpus) -> str:
    h = hashlib.sha256()
    for p in corpus:
        label = p.label.canonical_name if p.label is not None else ""
        h.update(f"{p.id}\t{label}\t{p.text}\n".encode("utf-8"))
    return h.hexdigest()


def _class_weights(labels: list[Label]) -> torch.Tensor:
    counts = np.array([max(1, sum(1 for lab in labels if lab == c)) for c in Label])
    weights = len(labels) / (N_CLASSES * counts)
    return torch.tensor(weights, dtype=torch.float32)


def _fit(model, config: SabiaConfig, train: Corpus, dev: Corpus | None) -> FineTuneResult:
    labels = _require_trainable(train)
    ids, mask = encode(model, train.texts())
    y = torch.tensor([int(lab) for lab in labels])

    weight = _class_weights(labels) if config.class_weights else None
    loss_fn = nn.CrossEntropyLoss(weight=weight)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    shuffler = random.Random(config.seed)

    loss_history = []
    dev_accuracy = [] if dev is not None else None
    order = list(range(len(train)))
    for _ in range(config.epochs):
        model.train()
        shuffler.shuffle(order)
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            optimizer.zero_grad()
            logits = model(ids[batch], mask[batch])
            loss = loss_fn(logits, y[batch])
            loss.backward()
            optimizer.step()
            total += loss.item() * len(batch)
        loss_history.append(total / len(order))
        if dev is not None:
            pred, _ = predict_sabia(model, dev.texts())
            gold = dev.labels()
            dev_accuracy.append(sum(p == g for p, g in zip(pred, gold)) / len(gold))
    model.eval()
    model.data_hash = corpus_hash(train)
    return FineTuneResult(model=model, loss_history=loss_history, dev_accuracy=dev_accuracy)


def fine_tune(config: SabiaConfig, train: Corpus, dev: Corpus | None = None) -> FineTuneResult:
    """End-to-end training of the hybrid model (encoder included).

    The seed fixes shuffling, dropout, and the init of all non-pretrained
    parts; tiny-encoder runs are bitwise reproducible.
    """
    torch.manual_seed(config.seed)
    model = SabiaModel(config)
    return _fit(model, config, train, dev)


def train_encoder_baseline(
    config: SabiaConfig, train: Corpus, dev: Corpus | None = None
) -> FineTuneResult:
    """Fine-tune the plain encoder with a start-token classification head."""
    torch.manual_seed(config.seed)
    model = EncoderClassifier(config)
    return _fit(model, config, train, dev)


def predict_sabia(model, texts: list[str]) -> tuple[list[Label], np.ndarray]:
    """(labels, softmax probabilities); argmax ties toward the lower code."""
    texts = list(texts)
    if not texts:
        return [], np.zeros((0, N_CLASSES))
    ids, mask = encode(model, texts)
    model.eval()
    rows = []
    with torch.no_grad():
        for start in range(0, len(texts), model.config.batch_size):
            logits = model(ids[start : start + model.config.batch_size],
                           mask[start : start + model.config.batch_size])
            rows.append(torch.softmax(logits, dim=1).numpy())
    probs = np.concatenate(rows)
    labels = [Label(int(i)) for i in np.argmax(probs, axis=1)]
    return labels, probs


def explain(model, text: str, k: int) -> list[tuple[str, float]]:
    """Top-k tokens by the L2 norm of the gradient of the predicted-class
    logit with respect to each token's input embedding.

    Specials and pads are excluded; ties keep text order.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    model.eval()
    ids, mask = encode(model, [text])
    embeds = model.encoder.get_input_embeddings()(ids).detach().requires_grad_(True)
    logits = model.forward_from_embeds(embeds, mask)
    pred = int(np.argmax(logits.detach().numpy()[0]))
    logits[0, pred].backward()
    grads = embeds.grad[0]  # [L, D]
    norms = grads.norm(dim=1)

    tokens = model.tokenizer.convert_ids_to_tokens(ids[0].tolist())
    special_ids = set(model.tokenizer.all_special_ids)
    scored = [
        (tok, float(norms[i]))
        for i, tok in enumerate(tokens)
        if int(mask[0, i]) == 1 and int(ids[0, i]) not in special_ids
    ]
    scored.sort(key=lambda ts: -ts[1])  # stable: ties stay in position order
    return scored[:k]


def save_checkpoint(model, out_dir: str | Path) -> None:
    """Checkpoint directory: weights blob, config manifest with label order,
    tokenizer vocabulary, and a model card recording seed and data hash."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = model.config
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "kind": model.kind,
        "config": asdict(config),
        "label_order": [lab.canonical_name for lab in model.label_order],
        "encoder_config": model.encoder.config.to_dict(),
        "seed": config.seed,
        "data_hash": model.data_hash,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    torch.save(model.state_dict(), out_dir / "weights.pt")
    model.tokenizer.save_pretrained(out_dir)
    (out_dir / "model_card.txt").write_text(
        f"kind: {model.kind}\n"
        f"checkpoint: {config.checkpoint}\n"
        f"seed: {config.seed}\n"
        f"training-data-sha256: {model.data_hash or 'unknown'}\n"
    )


def _encoder_from_manifest(manifest: dict):
    from transformers import AutoConfig, AutoModel

    enc_dict = dict(manifest["encoder_config"])
    model_type = enc_dict.pop("model_type", "bert")
    enc_cfg = AutoConfig.for_model(model_type, **enc_dict)
    return AutoModel.from_config(enc_cfg)


def load_checkpoint(path: str | Path):
    """Rebuild a SabiaModel or EncoderClassifier from a checkpoint directory."""
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    if manifest.get("format") != CHECKPOINT_FORMAT or manifest.get("version") != CHECKPOINT_VERSION:
        raise TrainingError(f"{path}: not a model checkpoint directory")

    raw = dict(manifest["config"])
    raw["kernels"] = tuple(raw["kernels"])
    config = SabiaConfig(**raw)

    if config.checkpoint == TINY_CHECKPOINT:
        from transformers import BertTokenizer

        tokenizer = BertTokenizer.from_pretrained(str(path))
    else:
        from transformers import AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(str(path))
    encoder = _encoder_from_manifest(manifest)

    cls = SabiaModel if manifest["kind"] == "sabia" else EncoderClassifier
    model = cls(config, encoder=encoder, tokenizer=tokenizer)
    state = torch.load(path / "weights.pt", weights_only=True)
    model.load_state_dict(state)
    model.eval()
    model.data_hash = manifest.get("data_hash")
    return model
