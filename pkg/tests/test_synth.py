import pytest

from sabia.corpus import CorpusError, Label, compute_stats
from sabia.lexicon import match_keywords
from sabia.synth import INFORMAL_RATE, WINDOW_END, WINDOW_START, SUBREDDITS, generate_synthetic

# Tokens that appear in exactly one class's phrase bank; separability rests
# on these staying class-unique.
CLASS_MARKERS = {
    Label.DEALER: {"deck", "dm", "stock", "bulk", "plug", "menu", "restocked", "shipping"},
    Label.ACTIVE_USER: {"took", "nodded", "tolerance", "buzzing", "craving", "high", "rush"},
    Label.RECOVERED_USER: {"clean", "sober", "relapse", "withdrawals", "quit", "milestone",
                           "meetings", "sponsor"},
    Label.PRESCRIPTION_USER: {"doctor", "prescribed", "script", "refill", "pharmacy",
                              "specialist", "prescription", "dependence", "tapering"},
    Label.NON_USER: {"report", "study", "news", "statistics", "article", "policy",
                     "overdoses", "crisis", "documentary", "epidemic"},
}


def test_zero_counts_give_empty_corpus(lexicon):
    corpus = generate_synthetic({lab: 0 for lab in Label}, lexicon, seed=1)
    assert len(corpus) == 0


def test_exact_class_counts(lexicon, synth_corpus):
    assert len(synth_corpus) == 200
    counts = compute_stats(synth_corpus).class_counts
    assert all(counts[lab] == 40 for lab in Label)


def test_deterministic_per_seed(lexicon):
    counts = {Label.DEALER: 7, Label.NON_USER: 3}
    a = generate_synthetic(counts, lexicon, seed=5)
    b = generate_synthetic(counts, lexicon, seed=5)
    assert a.posts == b.posts
    c = generate_synthetic(counts, lexicon, seed=6)
    assert a.posts != c.posts


def test_negative_count_rejected(lexicon):
    with pytest.raises(CorpusError, match="negative"):
        generate_synthetic({Label.DEALER: -1}, lexicon, seed=0)


def test_metadata_fields(synth_corpus):
    ids = set()
    for post in synth_corpus:
        assert post.id not in ids
        ids.add(post.id)
        assert post.subreddit in SUBREDDITS
        assert WINDOW_START <= post.created_utc < WINDOW_END
        assert post.text.strip()


def test_markers_are_class_unique(synth_corpus):
    for post in synth_corpus:
        words = set(post.text.lower().replace(",", " ").replace(".", " ").split())
        for other, markers in CLASS_MARKERS.items():
            if other != post.label:
                overlap = words & markers
                assert not overlap, (post.label, post.text, overlap)


def test_every_post_has_a_marker(synth_corpus):
    for post in synth_corpus:
        words = set(post.text.lower().replace(",", " ").replace("!", " ")
                    .replace("?", " ").replace(".", " ").split())
        assert words & CLASS_MARKERS[post.label], post.text


def test_dealer_posts_carry_informal_drug_terms(lexicon, synth_corpus):
    assert INFORMAL_RATE[Label.DEALER] == 1.0
    informal = {e.surface for e in lexicon.entries if e.kind in ("slang", "misspelling")}
    dealers = [p for p in synth_corpus if p.label is Label.DEALER]
    with_informal = sum(
        1 for p in dealers
        if any(m.surface in informal for m in match_keywords(lexicon, p.text))
    )
    assert with_informal == len(dealers)


def test_most_posts_match_lexicon_keywords(lexicon, synth_corpus):
    # ingestion-style keyword filtering keeps the bulk of the fixture
    matched = sum(1 for p in synth_corpus if match_keywords(lexicon, p.text))
    assert matched / len(synth_corpus) >= 0.75
