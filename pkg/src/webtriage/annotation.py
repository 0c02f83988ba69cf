"""Dual-annotator labeling: task assignment, OR adjudication, agreement stats.

Annotations persist as an append-only TSV journal; when an annotator revises
a snippet, the latest entry wins. Journal line:

  snippet_id  annotator_id  verdict  basis  timestamp(RFC 3339 UTC)
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from ._time import format_timestamp, parse_timestamp, utc_now
from .corpus import Label
from .errors import DatasetFormatError

_VERDICT_TOKENS = {"Interesting": Label.INTERESTING, "NotInteresting": Label.NOT_INTERESTING}
_VERDICT_NAMES = {v: k for k, v in _VERDICT_TOKENS.items()}


class Basis(Enum):
    SNIPPET_ONLY = "SnippetOnly"
    FULL_PAGE = "FullPage"


class TaskStatus(Enum):
    PENDING = "Pending"
    PARTIALLY_DONE = "PartiallyDone"
    DONE = "Done"


@dataclass(frozen=True)
class Annotation:
    snippet_id: str
    annotator_id: str
    verdict: Label
    basis: Basis = Basis.SNIPPET_ONLY
    created_at: datetime = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.created_at is None:
            object.__setattr__(self, "created_at", utc_now())


@dataclass(frozen=True)
class AnnotationTask:
    snippet_id: str
    annotators: tuple[str, str]
    status: TaskStatus = TaskStatus.PENDING

    def __post_init__(self):
        if self.annotators[0] == self.annotators[1]:
            raise ValueError(f"task {self.snippet_id}: annotators must be distinct")


@dataclass(frozen=True)
class AgreementReport:
    n_pairs: int
    observed: float
    kappa: float | None  # None when chance agreement is 1 (degenerate marginals)


def assign(snippets: Sequence, annotator_ids: Sequence[str], seed: int) -> list[AnnotationTask]:
    """Give every snippet two distinct annotators, keeping loads balanced:
    greedy least-loaded choice keeps any two annotators within one task of
    each other. Deterministic for a fixed seed and input order."""
    annotators = sorted(annotator_ids)
    if len(set(annotators)) != len(annotators):
        raise ValueError("annotator ids must be distinct")
    if len(annotators) < 2:
        raise ValueError(f"need at least 2 annotators, got {len(annotators)}")

    rng = random.Random(seed)
    counts = {a: 0 for a in annotators}
    tasks = []
    for snippet in snippets:
        sid = getattr(snippet, "id", snippet)
        first, second = sorted(annotators, key=lambda a: (counts[a], rng.random()))[:2]
        counts[first] += 1
        counts[second] += 1
        tasks.append(AnnotationTask(snippet_id=sid, annotators=(first, second)))
    return tasks


def adjudicate(a1: Annotation, a2: Annotation) -> Label:
    """OR rule: interesting if at least one annotator said so."""
    if a1.snippet_id != a2.snippet_id:
        raise ValueError(f"annotations for different snippets: {a1.snippet_id!r} vs {a2.snippet_id!r}")
    if a1.annotator_id == a2.annotator_id:
        raise ValueError(f"snippet {a1.snippet_id}: both annotations from {a1.annotator_id!r}")
    if Label.INTERESTING in (a1.verdict, a2.verdict):
        return Label.INTERESTING
    return Label.NOT_INTERESTING


def agreement(annotations: Iterable[Annotation]) -> AgreementReport:
    """Observed agreement and Cohen's kappa over double-annotated snippets.

    Every snippet must carry exactly two annotations. Raters are positional:
    within each pair, the annotation with the smaller annotator_id is rater 1.
    """
    by_snippet: dict[str, list[Annotation]] = {}
    for a in annotations:
        by_snippet.setdefault(a.snippet_id, []).append(a)
    bad = [sid for sid, pair in by_snippet.items() if len(pair) != 2]
    if bad:
        raise ValueError(f"snippets without exactly 2 annotations: {sorted(bad)[:5]}")
    if not by_snippet:
        raise ValueError("no annotation pairs to compare")

    n = len(by_snippet)
    matches = 0
    first_pos = 0
    second_pos = 0
    for pair in by_snippet.values():
        a1, a2 = sorted(pair, key=lambda a: a.annotator_id)
        matches += a1.verdict is a2.verdict
        first_pos += a1.verdict is Label.INTERESTING
        second_pos += a2.verdict is Label.INTERESTING
    p_o = matches / n
    p1, p2 = first_pos / n, second_pos / n
    p_e = p1 * p2 + (1.0 - p1) * (1.0 - p2)
    kappa = None if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)
    return AgreementReport(n_pairs=n, observed=p_o, kappa=kappa)


def adjudicate_all(annotations: Iterable[Annotation]) -> dict[str, Label]:
    """Adjudicate a whole journal: latest annotation per (snippet, annotator)
    wins, then the OR rule combines the two annotators' verdicts."""
    latest: dict[tuple[str, str], Annotation] = {}
    for a in annotations:
        key = (a.snippet_id, a.annotator_id)
        if key not in latest or a.created_at >= latest[key].created_at:
            latest[key] = a
    by_snippet: dict[str, list[Annotation]] = {}
    for a in latest.values():
        by_snippet.setdefault(a.snippet_id, []).append(a)
    labels = {}
    for sid, pair in sorted(by_snippet.items()):
        if len(pair) != 2:
            raise ValueError(f"snippet {sid}: expected 2 annotators, found {len(pair)}")
        labels[sid] = adjudicate(pair[0], pair[1])
    return labels


# -- journal persistence --

def append_annotations(path: str | Path, annotations: Iterable[Annotation]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8", newline="") as fh:
        for a in annotations:
            fh.write("\t".join((a.snippet_id, a.annotator_id, _VERDICT_NAMES[a.verdict],
                                a.basis.value, format_timestamp(a.created_at))) + "\n")


def read_journal(path: str | Path) -> list[Annotation]:
    path = Path(path)
    annotations = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        for i, line in enumerate(fh, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 5:
                raise DatasetFormatError(f"expected 5 fields, got {len(fields)}", str(path), i)
            sid, aid, verdict, basis, ts = fields
            if verdict not in _VERDICT_TOKENS:
                raise DatasetFormatError(f"unknown verdict {verdict!r}", str(path), i)
            try:
                annotations.append(Annotation(
                    snippet_id=sid, annotator_id=aid, verdict=_VERDICT_TOKENS[verdict],
                    basis=Basis(basis), created_at=parse_timestamp(ts)))
            except ValueError as exc:
                raise DatasetFormatError(str(exc), str(path), i) from exc
    return annotations
