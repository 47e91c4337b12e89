import pytest

from sabia.corpus import Label, SplitSpec, stratified_split
from sabia.features import load_embeddings, toy_embeddings_path
from sabia.lexicon import default_lexicon
from sabia.model import SabiaConfig, fine_tune
from sabia.synth import generate_synthetic


def accuracy(pred, gold) -> float:
    return sum(p == g for p, g in zip(pred, gold)) / len(gold)


@pytest.fixture(scope="session")
def lexicon():
    return default_lexicon()


@pytest.fixture(scope="session")
def synth_corpus(lexicon):
    """The standard 200-post desk-scale fixture, 40 posts per class, seed 80."""
    return generate_synthetic({lab: 40 for lab in Label}, lexicon, seed=80)


@pytest.fixture(scope="session")
def synth_split(synth_corpus):
    return stratified_split(synth_corpus, SplitSpec(train_fraction=0.8, seed=80))


@pytest.fixture(scope="session")
def toy_table():
    return load_embeddings(toy_embeddings_path(), dim=50)


@pytest.fixture(scope="session")
def tiny_config():
    """Training config for the tiny random-init encoder; the recorded 2e-5
    default assumes a pretrained checkpoint, so desk runs use 1e-3."""
    return SabiaConfig(checkpoint="tiny", learning_rate=1e-3, epochs=5)


@pytest.fixture(scope="session")
def trained_sabia(tiny_config, synth_split):
    train, _ = synth_split
    return fine_tune(tiny_config, train)
