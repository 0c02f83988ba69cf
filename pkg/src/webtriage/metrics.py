"""Binary confusion-matrix metrics and the submission-file evaluator.

The positive class is "interesting" (label token "1"). Precision and recall
are defined as 0 when their denominator is 0, which keeps F1 total.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Sequence

from .corpus import Label, read_labels
from .errors import DatasetFormatError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    f1: float
    accuracy: float
    precision: float
    recall: float

    def as_percentages(self) -> dict[str, float]:
        """Values scaled to percent and rounded half-up to 2 decimals."""
        return {name: _round2(100.0 * value) for name, value in (
            ("f1", self.f1), ("accuracy", self.accuracy),
            ("precision", self.precision), ("recall", self.recall))}


def _round2(value: float) -> float:
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _as_positive(label) -> bool:
    if isinstance(label, Label):
        return label is Label.INTERESTING
    return bool(label)


def confusion(predictions: Sequence, gold: Sequence) -> ConfusionMatrix:
    """Count TP/FP/FN/TN over aligned prediction/gold pairs.

    Accepts `Label` values or anything truthy-for-positive (1/0, bool).
    """
    if len(predictions) != len(gold):
        raise ValueError(f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold labels")
    if len(predictions) == 0:
        raise ValueError("cannot evaluate an empty label list")
    tp = fp = fn = tn = 0
    for pred, ref in zip(predictions, gold):
        p, g = _as_positive(pred), _as_positive(ref)
        if p and g:
            tp += 1
        elif p and not g:
            fp += 1
        elif not p and g:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean, 0 when both components are 0."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total == 0:
        raise ValueError("cannot compute metrics of an empty confusion matrix")
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    accuracy = (cm.tp + cm.tn) / cm.total
    return MetricsReport(f1=f1_score(precision, recall), accuracy=accuracy,
                         precision=precision, recall=recall)


def geval_evaluate(expected_path: str | Path, out_path: str | Path) -> float:
    """Score a submission: F1 of out.tsv against expected.tsv, in [0, 1].

    Both files hold one "0"/"1" token per line and must have equal line
    counts; violations raise DatasetFormatError naming the offending line.
    """
    expected = read_labels(expected_path)
    out = read_labels(out_path)
    if len(expected) != len(out):
        raise DatasetFormatError(
            f"line-count mismatch: {expected_path} has {len(expected)} lines, "
            f"{out_path} has {len(out)}")
    return metrics(confusion(out, expected)).f1
