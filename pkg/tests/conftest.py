"""Shared fixture builders: deterministic synthetic corpora."""

from __future__ import annotations

import random
from fractions import Fraction

from webtriage.corpus import Label, LabeledSnippet, Snippet, Theme

# Published thematic distribution used by the distribution/split fixtures.
THEME_COUNTS = {
    Theme.DRUGS: 80_107,
    Theme.SALE_OF_ORGANS: 10_301,
    Theme.CIGARETTES: 7_244,
    Theme.DOCUMENTS: 5_175,
    Theme.WEAPONS_EXPLOSIVES: 5_022,
    Theme.ALCOHOL: 2_904,
    Theme.SEX_CRIME: 2_509,
    Theme.HUMAN_TRAFFICKING: 1_170,
}
TOTAL_COUNT = 114_432
POSITIVE_RATE = Fraction(223, 10_000)  # 2.23% of snippets are interesting

BACKGROUND_TOKENS = [f"tlo{i:02d}" for i in range(50)]
SIGNAL_TOKENS = ["przemyt", "akcyza", "kontrabanda"]


def make_snippet(i: int, theme: Theme | None = None, text: str | None = None,
                 query: str = "q", engine: str = "fixture") -> Snippet:
    return Snippet(id=f"s{i:06d}", query=query, engine=engine,
                   url=f"https://example.org/page/{i}", title=f"title {i}",
                   snippet_text=text or f"snippet text {i}", theme=theme)


def make_labeled(i: int, label: Label, theme: Theme | None = None,
                 text: str | None = None) -> LabeledSnippet:
    return LabeledSnippet(make_snippet(i, theme=theme, text=text), label)


def _spread(total: int, weights: list[int]) -> list[int]:
    """Largest-remainder apportionment of `total` over integer weights."""
    denom = sum(weights)
    quotas = [Fraction(total * w, denom) for w in weights]
    base = [int(q) for q in quotas]
    leftover = total - sum(base)
    order = sorted(range(len(base)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def table1_corpus() -> list[LabeledSnippet]:
    """114,432 records with the published per-theme counts and 2.23%
    positives, spread across themes proportionally."""
    themes = list(THEME_COUNTS)
    counts = [THEME_COUNTS[t] for t in themes]
    positives = _spread(round(TOTAL_COUNT * POSITIVE_RATE), counts)
    records = []
    i = 0
    for theme, count, pos in zip(themes, counts, positives):
        for j in range(count):
            label = Label.INTERESTING if j < pos else Label.NOT_INTERESTING
            records.append(make_labeled(i, label, theme=theme))
            i += 1
    assert i == TOTAL_COUNT
    return records


def planted_signal_corpus(n: int = 5_000, positive_rate: float = 0.02,
                          seed: int = 13, noise_rate: float = 0.002) -> list[LabeledSnippet]:
    """Synthetic text corpus with a planted lexical signal: positives carry
    all three signal tokens, a small fraction of negatives carry one."""
    rng = random.Random(seed)
    n_pos = round(n * positive_rate)
    records = []
    for i in range(n):
        positive = i < n_pos
        if positive:
            words = rng.sample(BACKGROUND_TOKENS, 1) + list(SIGNAL_TOKENS)
        else:
            words = rng.sample(BACKGROUND_TOKENS, 6)
            if rng.random() < noise_rate:
                words.append(rng.choice(SIGNAL_TOKENS))
        rng.shuffle(words)
        theme = list(THEME_COUNTS)[i % len(THEME_COUNTS)]
        records.append(make_labeled(
            i, Label.INTERESTING if positive else Label.NOT_INTERESTING,
            theme=theme, text=" ".join(words)))
    rng.shuffle(records)
    return records
