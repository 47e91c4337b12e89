"""Deterministic synthetic corpus generator for desk-scale testing.

Each class draws from its own phrase bank, so every generated post carries
class-unique marker tokens and the classes are linearly separable by
construction. Drug-name slots are filled from the lexicon, mixing in slang
and misspellings at a seeded, class-dependent rate (street-sale posts lean
on slang; prescription and bystander posts use formal names).
"""

from __future__ import annotations

import random

from .corpus import AnnotatedPost, Corpus, CorpusError, Label
from .lexicon import Lexicon

SUBREDDITS = ("opiates", "chronicpain", "OpiatesRecovery", "addiction")

#: Generation window, epoch seconds (2023-01-02 .. 2024-04-04 UTC).
WINDOW_START = 1672617600
WINDOW_END = 1712188800

#: Probability that a drug slot is filled with slang/misspelling instead of a
#: formal name. Street-sale posts are written almost entirely in slang while
#: the other registers stay formal, so informal drug talk is itself a class
#: signal the attribution tooling can be validated against.
INFORMAL_RATE = {
    Label.DEALER: 1.0,
    Label.ACTIVE_USER: 0.05,
    Label.RECOVERED_USER: 0.05,
    Label.PRESCRIPTION_USER: 0.05,
    Label.NON_USER: 0.05,
}

_DOSES = (10, 20, 30, 40, 60, 80)
_PRICES = (5, 10, 15, 20, 25, 40)
_MONTHS = (2, 3, 6, 8, 9, 14, 18)
_DAYS = (3, 5, 9, 12, 30, 45, 60, 90)
_PERCENTS = (12, 18, 20, 25, 30, 35, 40)

# Main templates per class. Slots: {drug} {drug2} {dose} {price} {months}
# {days} {percent}. Marker words (deck, nodded, sober, refill, statistics, ...)
# appear in exactly one class's bank.
_TEMPLATES = {
    Label.DEALER: (
        "got {drug} and {drug2} on deck, dm for prices.",
        "{drug} back in stock, {price} a pop, tap in.",
        "bulk {drug} and {drug2} this week, serious buyers dm me.",
        "plug here, {drug} and {drug2} moving fast, menu in bio.",
        "restocked {drug} and {drug2} today, shipping discreet.",
        "who needs {drug}? {price} each, dm before stock runs out.",
    ),
    Label.ACTIVE_USER: (
        "took {dose}mg of {drug} and nodded off for hours.",
        "been on {drug} all week, tolerance is climbing fast.",
        "that {drug} got me buzzing, best high in months.",
        "craving {drug} again, how much do you all take in a day?",
        "did a {dose}mg shot of {drug} last night, still feeling the rush.",
        "mixed {drug} with {drug2} yesterday, nodded straight through work.",
    ),
    Label.RECOVERED_USER: (
        "{months} months clean today, the meetings keep me grounded.",
        "day {days} off {drug}, withdrawals finally easing up.",
        "hit my {months} month sober milestone this week!",
        "quit {drug} for good, recovery is slow but worth it.",
        "one year since my last relapse, staying sober one day at a time.",
        "{days} days clean from {drug}, my sponsor checks in every night.",
    ),
    Label.PRESCRIPTION_USER: (
        "my doctor raised my {drug} script for the nerve pain.",
        "pharmacy delayed my {drug} refill again and the pain is flaring up.",
        "been prescribed {drug} for chronic back pain for {months} months.",
        "worried about dependence but i never take more than my doctor prescribed.",
        "seeing my pain specialist about tapering the {drug} script slowly.",
        "my prescription for {drug} runs out friday, hope the refill clears.",
    ),
    Label.NON_USER: (
        "new report says {drug} overdoses rose {percent} percent statewide last year.",
        "reading a study on how {drug} affects long term brain chemistry.",
        "local news covered another {drug} bust downtown yesterday.",
        "never touched {drug} myself, but the statistics in this article are grim.",
        "what policy changes would actually slow the {drug} crisis?",
        "a documentary about the {drug} epidemic aired last night, worth watching.",
    ),
}

# Optional follow-up sentences, appended roughly half the time.
_CLOSERS = {
    Label.DEALER: (
        "first taste free for new buyers.",
        "same day drops, dm only.",
        "no shorts, no games.",
    ),
    Label.ACTIVE_USER: (
        "cant even get high off my usual amount anymore.",
        "chasing that first rush every single time.",
        "tolerance is getting expensive.",
    ),
    Label.RECOVERED_USER: (
        "to anyone struggling, it does get better.",
        "meetings twice a week keep me honest.",
        "grateful for every sober morning.",
    ),
    Label.PRESCRIPTION_USER: (
        "i follow the script exactly as written.",
        "my doctor monitors the refills closely.",
        "the pain clinic reviews my chart monthly.",
    ),
    Label.NON_USER: (
        "posting this for awareness only.",
        "the statistics speak for themselves.",
        "curious what this community thinks.",
    ),
}


def _drug_pools(lexicon: Lexicon) -> tuple[list[str], list[str]]:
    """(formal, informal) drug-name pools drawn from the lexicon.

    Homonym slang (black, chocolate) and non-drug terms (narc, narcan, btb)
    would read oddly in a drug slot, so they are left out.
    """
    skip = {"black", "chocolate", "narc", "narcan", "btb", "opioid"}
    formal = [e.surface for e in lexicon.entries if e.kind == "formal" and e.surface not in skip]
    informal = [
        e.surface
        for e in lexicon.entries
        if e.kind in ("slang", "misspelling") and e.surface not in skip
    ]
    return formal or ["heroin"], informal or ["oxy"]


def _pick_drug(rng: random.Random, label: Label, formal: list[str], informal: list[str]) -> str:
    pool = informal if rng.random() < INFORMAL_RATE[label] else formal
    return rng.choice(pool)


def _render(rng: random.Random, label: Label, formal: list[str], informal: list[str]) -> str:
    template = rng.choice(_TEMPLATES[label])
    text = template.format(
        drug=_pick_drug(rng, label, formal, informal),
        drug2=_pick_drug(rng, label, formal, informal),
        dose=rng.choice(_DOSES),
        price=rng.choice(_PRICES),
        months=rng.choice(_MONTHS),
        days=rng.choice(_DAYS),
        percent=rng.choice(_PERCENTS),
    )
    if rng.random() < 0.5:
        text = text + " " + rng.choice(_CLOSERS[label])
    if rng.random() < 0.3:
        text = text[0].upper() + text[1:]
    return text


def generate_synthetic(
    n_per_class: dict[Label, int], lexicon: Lexicon, seed: int
) -> Corpus:
    """Generate a labeled corpus with the requested per-class counts.

    Deterministic: the same arguments always produce an identical corpus.
    """
    for label, n in n_per_class.items():
        if n < 0:
            raise CorpusError(f"negative count for {label.canonical_name}: {n}")

    rng = random.Random(seed)
    formal, informal = _drug_pools(lexicon)
    posts = []
    for label in sorted(n_per_class):
        for i in range(n_per_class[label]):
            posts.append(
                AnnotatedPost(
                    id=f"syn-{label.canonical_name.lower()}-{i:04d}",
                    subreddit=rng.choice(SUBREDDITS),
                    created_utc=rng.randrange(WINDOW_START, WINDOW_END),
                    text=_render(rng, label, formal, informal),
                    label=label,
                )
            )
    return Corpus(tuple(posts))
