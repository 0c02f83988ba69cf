"""Semaphore verdicts, result ranking, and the operator feedback journal.

The feedback journal is append-only for auditability: every operator decision
and every completed retrain is one line, and replaying the file reproduces
the store state exactly. Journal lines (tab-separated):

  snippet_id  label(criminal|non_criminal)  prior_verdict  timestamp  operator_id
  #retrain    timestamp  model_version
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._time import format_timestamp, parse_timestamp, utc_now
from .corpus import Label, LabeledSnippet, Provenance, Snippet
from .errors import DatasetFormatError, WebTriageError

DEFAULT_RETRAIN_THRESHOLD = 500


class Verdict(Enum):
    RED = "red"
    YELLOW = "yellow"
    GREEN = "green"


_VERDICT_ORDER = {Verdict.RED: 0, Verdict.YELLOW: 1, Verdict.GREEN: 2}


class FeedbackLabel(Enum):
    CRIMINAL = "criminal"
    NON_CRIMINAL = "non_criminal"


@dataclass(frozen=True)
class Thresholds:
    red: float = 0.7
    yellow: float = 0.3

    def __post_init__(self):
        if not 0.0 <= self.yellow < self.red <= 1.0:
            raise ValueError(f"need 0 <= yellow < red <= 1, got yellow={self.yellow}, red={self.red}")


def verdict(p: float, thresholds: Thresholds = Thresholds()) -> Verdict:
    """Red iff p >= red threshold, yellow iff yellow <= p < red, else green."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p >= thresholds.red:
        return Verdict.RED
    if p >= thresholds.yellow:
        return Verdict.YELLOW
    return Verdict.GREEN


@dataclass(frozen=True)
class TriageResult:
    snippet: Snippet
    probability: float
    verdict: Verdict


def classify(snippet: Snippet, probability: float,
             thresholds: Thresholds = Thresholds()) -> TriageResult:
    return TriageResult(snippet=snippet, probability=probability,
                        verdict=verdict(probability, thresholds))


def rank(results: Sequence[TriageResult]) -> list[TriageResult]:
    """Total deterministic order: red before yellow before green, then
    probability descending, then snippet id ascending."""
    return sorted(results, key=lambda r: (_VERDICT_ORDER[r.verdict], -r.probability, r.snippet.id))


@dataclass(frozen=True)
class FeedbackEvent:
    snippet_id: str
    label: FeedbackLabel
    prior_verdict: Verdict
    timestamp: datetime
    operator_id: str

    @property
    def as_label(self) -> Label:
        return Label.INTERESTING if self.label is FeedbackLabel.CRIMINAL else Label.NOT_INTERESTING


class UnknownSnippetError(WebTriageError):
    """Feedback referenced a snippet id the system has never served."""


class FeedbackStore:
    """Append-only journal of operator decisions with a retrain watermark.

    The journal is replayed at open; `record` has a single serialized writer.
    When `known_ids` is given, events for other snippet ids are rejected.
    """

    def __init__(self, path: str | Path, known_ids: set[str] | None = None):
        self.path = Path(path)
        self._known = known_ids
        self._lock = threading.Lock()
        self._events: list[FeedbackEvent] = []
        self._since_retrain = 0
        self._last_model_version: str | None = None
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        for i, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line:
                continue
            fields = line.split("\t")
            if fields[0] == "#retrain":
                if len(fields) != 3:
                    raise DatasetFormatError("malformed retrain marker", str(self.path), i)
                self._since_retrain = 0
                self._last_model_version = fields[2]
                continue
            if len(fields) != 5:
                raise DatasetFormatError(f"expected 5 fields, got {len(fields)}", str(self.path), i)
            sid, label, prior, ts, operator = fields
            try:
                event = FeedbackEvent(snippet_id=sid, label=FeedbackLabel(label),
                                      prior_verdict=Verdict(prior),
                                      timestamp=parse_timestamp(ts), operator_id=operator)
            except ValueError as exc:
                raise DatasetFormatError(str(exc), str(self.path), i) from exc
            self._events.append(event)
            self._since_retrain += 1

    def record(self, event: FeedbackEvent) -> None:
        """Durably append one decision; prior events are never mutated."""
        if self._known is not None and event.snippet_id not in self._known:
            raise UnknownSnippetError(f"unknown snippet id {event.snippet_id!r}")
        line = "\t".join((event.snippet_id, event.label.value, event.prior_verdict.value,
                          format_timestamp(event.timestamp), event.operator_id))
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8", newline="") as fh:
                fh.write(line + "\n")
            self._events.append(event)
            self._since_retrain += 1

    def mark_retrained(self, model_version: str, at: datetime | None = None) -> None:
        """Journal a completed retrain; resets the decision counter."""
        with self._lock:
            with self.path.open("a", encoding="utf-8", newline="") as fh:
                fh.write(f"#retrain\t{format_timestamp(at or utc_now())}\t{model_version}\n")
            self._since_retrain = 0
            self._last_model_version = model_version

    def events(self) -> list[FeedbackEvent]:
        return list(self._events)

    def __len__(self) -> int:
        return len(self._events)

    @property
    def decisions_since_retrain(self) -> int:
        return self._since_retrain

    @property
    def last_model_version(self) -> str | None:
        return self._last_model_version


def should_retrain(store: FeedbackStore, n_threshold: int = DEFAULT_RETRAIN_THRESHOLD) -> bool:
    """True once the decisions made since the last completed retrain reach
    the threshold."""
    if n_threshold < 1:
        raise ValueError("n_threshold must be >= 1")
    return store.decisions_since_retrain >= n_threshold


def latest_by_snippet(events: Iterable[FeedbackEvent]) -> dict[str, FeedbackEvent]:
    """Latest event per snippet: later timestamp wins, journal order breaks ties."""
    latest: dict[str, FeedbackEvent] = {}
    for event in events:
        held = latest.get(event.snippet_id)
        if held is None or event.timestamp >= held.timestamp:
            latest[event.snippet_id] = event
    return latest


def merge_feedback(base: Sequence[LabeledSnippet],
                   store: FeedbackStore | Iterable[FeedbackEvent],
                   snippets_by_id: Mapping[str, Snippet] | None = None) -> list[LabeledSnippet]:
    """Fold operator decisions into a training set: the latest event per
    snippet overrides the base label (provenance OperatorFeedback); snippets
    with feedback but absent from base are appended in id order, resolved
    through `snippets_by_id`."""
    events = store.events() if isinstance(store, FeedbackStore) else list(store)
    overrides = latest_by_snippet(events)

    merged: list[LabeledSnippet] = []
    for record in base:
        event = overrides.pop(record.id, None)
        if event is None:
            merged.append(record)
        else:
            merged.append(LabeledSnippet(snippet=record.snippet, label=event.as_label,
                                         provenance=Provenance.OPERATOR_FEEDBACK))
    for sid in sorted(overrides):
        if snippets_by_id is None or sid not in snippets_by_id:
            raise ValueError(f"feedback for snippet {sid!r} which is in neither "
                             "the base set nor the snippet registry")
        merged.append(LabeledSnippet(snippet=snippets_by_id[sid], label=overrides[sid].as_label,
                                     provenance=Provenance.OPERATOR_FEEDBACK))
    return merged
