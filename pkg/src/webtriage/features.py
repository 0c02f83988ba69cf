"""Deterministic text-to-sparse-vector pipeline: tokenize, fit vocab, tf-idf.

No stemming or language-specific processing: slang surface forms are the
signal, and determinism across platforms matters more than linguistic
normalization. Default settings keep unigrams+bigrams so multiword phrases
survive as features.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DatasetFormatError

# Letters and digits only; underscore counts as punctuation here.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_MIN_DF = 2
DEFAULT_MAX_FEATURES = 100_000
DEFAULT_NGRAM_RANGE = (1, 2)


def tokenize(text: str) -> list[str]:
    """Unicode word segmentation, lowercased; digits kept, punctuation dropped."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def _terms(tokens: Sequence[str], ngram_range: tuple[int, int]) -> list[str]:
    lo, hi = ngram_range
    out = []
    for n in range(lo, hi + 1):
        out.extend(" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1))
    return out


@dataclass(frozen=True)
class FeatureVector:
    """Sparse unit vector: parallel (index, weight) arrays sorted by index."""

    indices: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must have equal length")
        if any(a >= b for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")


EMPTY_VECTOR = FeatureVector(indices=(), values=())


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]          # term -> 0..V-1, assigned in lexicographic term order
    df: dict[str, int]             # document frequency per retained term
    n_docs: int
    min_df: int = DEFAULT_MIN_DF
    max_features: int | None = DEFAULT_MAX_FEATURES
    ngram_range: tuple[int, int] = DEFAULT_NGRAM_RANGE
    idf: dict[str, float] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "idf", {
            t: math.log((1 + self.n_docs) / (1 + df)) + 1.0 for t, df in self.df.items()})

    def __len__(self) -> int:
        return len(self.index)

    def serialize(self) -> str:
        mf = "none" if self.max_features is None else str(self.max_features)
        lines = ["\t".join(("#vocabulary", "v1", f"n_docs={self.n_docs}", f"min_df={self.min_df}",
                            f"max_features={mf}",
                            f"ngram_range={self.ngram_range[0]},{self.ngram_range[1]}"))]
        for term in sorted(self.index):
            lines.append(f"{term}\t{self.index[term]}\t{self.df[term]}")
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.serialize(), encoding="utf-8", newline="")


def load_vocabulary(path: str | Path) -> Vocabulary:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#vocabulary\tv1"):
        raise DatasetFormatError("missing vocabulary header", str(path), 1)
    settings = dict(part.split("=", 1) for part in lines[0].split("\t")[2:])
    mf = settings["max_features"]
    lo, hi = settings["ngram_range"].split(",")
    index: dict[str, int] = {}
    df: dict[str, int] = {}
    for i, line in enumerate(lines[1:], start=2):
        try:
            term, idx, term_df = line.split("\t")
            index[term] = int(idx)
            df[term] = int(term_df)
        except ValueError as exc:
            raise DatasetFormatError(f"malformed vocabulary row: {line!r}", str(path), i) from exc
    return Vocabulary(index=index, df=df, n_docs=int(settings["n_docs"]),
                      min_df=int(settings["min_df"]),
                      max_features=None if mf == "none" else int(mf),
                      ngram_range=(int(lo), int(hi)))


def fit_vocabulary(corpus: Iterable[str],
                   min_df: int = DEFAULT_MIN_DF,
                   max_features: int | None = DEFAULT_MAX_FEATURES,
                   ngram_range: tuple[int, int] = DEFAULT_NGRAM_RANGE) -> Vocabulary:
    """Count document frequencies, drop terms with df < min_df, then keep the
    max_features highest-df terms (ties broken lexicographically). Indices
    are assigned in lexicographic term order over the retained set."""
    df: dict[str, int] = {}
    n_docs = 0
    for doc in corpus:
        n_docs += 1
        for term in set(_terms(tokenize(doc), ngram_range)):
            df[term] = df.get(term, 0) + 1
    if n_docs == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")

    kept = [t for t, c in df.items() if c >= min_df]
    if max_features is not None and len(kept) > max_features:
        kept.sort(key=lambda t: (-df[t], t))
        kept = kept[:max_features]
    kept.sort()
    return Vocabulary(index={t: i for i, t in enumerate(kept)},
                      df={t: df[t] for t in kept}, n_docs=n_docs,
                      min_df=min_df, max_features=max_features, ngram_range=ngram_range)


def vectorize(text: str, vocabulary: Vocabulary) -> FeatureVector:
    """tf-idf vector, L2-normalized. tf is the raw term count and
    idf = ln((1+N)/(1+df)) + 1; out-of-vocabulary terms are ignored and
    all-OOV text yields the zero vector."""
    counts: dict[int, int] = {}
    idf_at: dict[int, float] = {}
    for term in _terms(tokenize(text), vocabulary.ngram_range):
        idx = vocabulary.index.get(term)
        if idx is None:
            continue
        counts[idx] = counts.get(idx, 0) + 1
        idf_at[idx] = vocabulary.idf[term]
    if not counts:
        return EMPTY_VECTOR
    indices = sorted(counts)
    weights = [counts[i] * idf_at[i] for i in indices]
    norm = math.sqrt(sum(w * w for w in weights))
    return FeatureVector(indices=tuple(indices), values=tuple(w / norm for w in weights))
