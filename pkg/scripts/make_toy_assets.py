"""Regenerate the bundled desk-scale assets.

Writes src/sabia/data/tiny_vocab.txt (WordPiece vocabulary for the tiny test
encoder) and src/sabia/data/toy_embeddings_50d.txt (deterministic 50-dim
vectors). Both are derived from the synthetic phrase banks, the starter
lexicon, and the cleaning word lists, so every token the synthetic corpus can
produce is covered. Output is deterministic: rerunning changes nothing.
"""

from __future__ import annotations

import hashlib
import re
import string
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from sabia import preprocess, synth  # noqa: E402
from sabia.lexicon import default_lexicon  # noqa: E402

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
EMBED_DIM = 50


def bank_words() -> set[str]:
    words = set()
    for templates in list(synth._TEMPLATES.values()) + list(synth._CLOSERS.values()):
        for template in templates:
            stripped = re.sub(r"\{[a-z0-9]+\}", " ", template)
            for tok in re.findall(r"[a-z]+", stripped.lower()):
                words.add(tok)
    for entry in default_lexicon().entries:
        words.update(entry.surface.split())
        words.update(entry.canonical.split())
    # numeric slot realizations, with the units they appear next to
    for dose in synth._DOSES:
        words.add(f"{dose}mg")
    return words


def main() -> None:
    data_dir = ROOT / "src" / "sabia" / "data"
    lexicon = default_lexicon()

    words = bank_words()
    words |= preprocess.stopwords()
    words |= preprocess.function_words()
    words |= {preprocess.lemmatize(w) for w in set(words)}
    words |= set(preprocess.default_lemma_exceptions().values())

    chars = list(string.ascii_lowercase + string.digits)
    punct = list("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")
    pieces = [f"##{c}" for c in chars] + ["##mg", "##s", "##ing", "##ed", "##er", "##ly"]

    vocab = SPECIALS + sorted(set(chars + punct)) + sorted(set(pieces)) + sorted(words)
    seen, ordered = set(), []
    for tok in vocab:
        if tok not in seen:
            seen.add(tok)
            ordered.append(tok)
    (data_dir / "tiny_vocab.txt").write_text("\n".join(ordered) + "\n")
    print(f"tiny_vocab.txt: {len(ordered)} entries")

    # Embedding vocabulary covers the cleaned (lemmatized) token space.
    # Vector norms are drawn around 7, matching typical pretrained tables;
    # unit-norm vectors make the gradients of downstream classifiers too
    # small to train at modest learning rates.
    embed_words = sorted(words | {f"{d}mg" for d in synth._DOSES})
    lines = []
    for word in embed_words:
        digest = hashlib.sha256(word.encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        vec = rng.standard_normal(EMBED_DIM)
        vec *= rng.uniform(5.0, 9.0) / np.linalg.norm(vec)
        lines.append(word + " " + " ".join(f"{x:.5f}" for x in vec))
    (data_dir / "toy_embeddings_50d.txt").write_text("\n".join(lines) + "\n")
    print(f"toy_embeddings_50d.txt: {len(lines)} vectors of dim {EMBED_DIM}")


if __name__ == "__main__":
    main()
