"""Canonical snippet records, benchmark-style TSV persistence, stratified splits.

File formats (UTF-8, LF, tab separators, no header):

  in.tsv        id  query  engine  url  title  snippet_text  theme(optional)
  expected.tsv  one label token per line ("1" interesting / "0" not), aligned
                with in.tsv
  labeled.tsv   the in.tsv columns plus the label token as an 8th column
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlsplit

from .errors import DatasetFormatError

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

IN_TSV = "in.tsv"
EXPECTED_TSV = "expected.tsv"


class Theme(Enum):
    DRUGS = "Drugs"
    SALE_OF_ORGANS = "SaleOfOrgans"
    CIGARETTES = "Cigarettes"
    DOCUMENTS = "Documents"
    WEAPONS_EXPLOSIVES = "WeaponsExplosives"
    ALCOHOL = "Alcohol"
    SEX_CRIME = "SexCrime"
    HUMAN_TRAFFICKING = "HumanTrafficking"


class Label(Enum):
    INTERESTING = "1"
    NOT_INTERESTING = "0"


class Provenance(Enum):
    ADJUDICATED = "Adjudicated"
    OPERATOR_FEEDBACK = "OperatorFeedback"


class Layout(Enum):
    PAIRED_IN_EXPECTED = "paired"   # directory with in.tsv + expected.tsv
    SINGLE_FILE_LABELED = "single"  # one TSV, label as last column


def _valid_url(url: str) -> bool:
    try:
        parts = urlsplit(url)
    except ValueError:
        return False
    return bool(parts.scheme) and bool(parts.netloc)


@dataclass(frozen=True)
class Snippet:
    """One search-engine result. `page_text` and `theme` are optional;
    `collected_at` defaults to the epoch for records loaded from TSV,
    which does not persist timestamps."""

    id: str
    query: str
    engine: str
    url: str
    title: str
    snippet_text: str
    page_text: str | None = None
    theme: Theme | None = None
    collected_at: datetime = EPOCH

    def __post_init__(self):
        if not self.id:
            raise ValueError("snippet id must be nonempty")
        if not self.snippet_text:
            raise ValueError(f"snippet {self.id}: snippet_text must be nonempty")
        if not _valid_url(self.url):
            raise ValueError(f"snippet {self.id}: invalid url {self.url!r}")
        if self.collected_at.tzinfo is None:
            raise ValueError(f"snippet {self.id}: collected_at must be timezone-aware")


@dataclass(frozen=True)
class LabeledSnippet:
    snippet: Snippet
    label: Label
    provenance: Provenance = Provenance.ADJUDICATED

    @property
    def id(self) -> str:
        return self.snippet.id


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[LabeledSnippet, ...]
    validation: tuple[LabeledSnippet, ...]
    test: tuple[LabeledSnippet, ...]
    seed: int

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.validation), len(self.test))


@dataclass(frozen=True)
class ReportRow:
    name: str
    count: int
    percent: float  # of total, rounded half-up to 2 decimals


@dataclass(frozen=True)
class DistributionReport:
    total: int
    themes: tuple[ReportRow, ...]
    labels: tuple[ReportRow, ...]

    def render(self) -> str:
        lines = [f"total\t{self.total}"]
        for row in self.themes:
            lines.append(f"theme\t{row.name}\t{row.count}\t{row.percent:.2f}")
        for row in self.labels:
            lines.append(f"label\t{row.name}\t{row.count}\t{row.percent:.2f}")
        return "\n".join(lines)


# -- TSV persistence --

_FIELD_SEP = "\t"


def _sanitize(value: str) -> str:
    """TSV fields cannot hold tabs or newlines; collapse them to spaces."""
    return value.replace("\t", " ").replace("\r", " ").replace("\n", " ")


def _snippet_row(s: Snippet) -> str:
    theme = s.theme.value if s.theme is not None else ""
    fields = (s.id, s.query, s.engine, s.url, s.title, s.snippet_text, theme)
    return _FIELD_SEP.join(_sanitize(f) for f in fields)


def _decode_lines(path: Path) -> list[str]:
    """Split on LF and decode line by line so UTF-8 errors carry a line number."""
    raw = path.read_bytes()
    chunks = raw.split(b"\n")
    if chunks and chunks[-1] == b"":
        chunks.pop()
    lines = []
    for i, chunk in enumerate(chunks, start=1):
        try:
            lines.append(chunk.decode("utf-8"))
        except UnicodeDecodeError as exc:
            raise DatasetFormatError(f"non-UTF-8 bytes ({exc.reason})", str(path), i) from exc
    return lines


def _parse_snippet_row(line: str, path: Path, lineno: int) -> Snippet:
    fields = line.split(_FIELD_SEP)
    if len(fields) != 7:
        raise DatasetFormatError(f"expected 7 tab-separated fields, got {len(fields)}", str(path), lineno)
    sid, query, engine, url, title, text, theme_token = fields
    theme = None
    if theme_token:
        try:
            theme = Theme(theme_token)
        except ValueError:
            raise DatasetFormatError(f"unknown theme {theme_token!r}", str(path), lineno) from None
    try:
        return Snippet(id=sid, query=query, engine=engine, url=url, title=title,
                       snippet_text=text, theme=theme)
    except ValueError as exc:
        raise DatasetFormatError(str(exc), str(path), lineno) from exc


def _parse_label(token: str, path: Path, lineno: int) -> Label:
    try:
        return Label(token)
    except ValueError:
        raise DatasetFormatError(f"malformed label token {token!r} (expected '0' or '1')",
                                 str(path), lineno) from None


def read_snippets(path: str | Path) -> list[Snippet]:
    """Read an in.tsv file of unlabeled snippets, order preserved."""
    path = Path(path)
    return [_parse_snippet_row(line, path, i)
            for i, line in enumerate(_decode_lines(path), start=1)]


def write_snippets(snippets: Iterable[Snippet], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(_snippet_row(s) + "\n" for s in snippets)
    path.write_text(body, encoding="utf-8", newline="")


def read_labels(path: str | Path) -> list[Label]:
    """Read an expected.tsv / out.tsv file of one label token per line."""
    path = Path(path)
    return [_parse_label(line, path, i)
            for i, line in enumerate(_decode_lines(path), start=1)]


def write_labels(labels: Iterable[Label], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(label.value + "\n" for label in labels)
    path.write_text(body, encoding="utf-8", newline="")


def read_dataset(path: str | Path, layout: Layout = Layout.PAIRED_IN_EXPECTED) -> list[LabeledSnippet]:
    """Read labeled records.

    PAIRED_IN_EXPECTED: `path` is a directory holding in.tsv and expected.tsv
    with equal line counts. SINGLE_FILE_LABELED: `path` is one TSV whose last
    column is the label token.
    """
    path = Path(path)
    if layout is Layout.PAIRED_IN_EXPECTED:
        in_path, exp_path = path / IN_TSV, path / EXPECTED_TSV
        snippets = read_snippets(in_path)
        labels = read_labels(exp_path)
        if len(snippets) != len(labels):
            raise DatasetFormatError(
                f"line-count mismatch: {in_path} has {len(snippets)} lines, "
                f"{exp_path} has {len(labels)}", str(path))
        return [LabeledSnippet(s, l) for s, l in zip(snippets, labels)]

    records = []
    for i, line in enumerate(_decode_lines(path), start=1):
        row, sep, token = line.rpartition(_FIELD_SEP)
        if not sep:
            raise DatasetFormatError("expected 8 tab-separated fields, got 1", str(path), i)
        snippet = _parse_snippet_row(row, path, i)
        records.append(LabeledSnippet(snippet, _parse_label(token, path, i)))
    return records


def write_dataset(records: Sequence[LabeledSnippet], path: str | Path,
                  layout: Layout = Layout.PAIRED_IN_EXPECTED) -> None:
    path = Path(path)
    if layout is Layout.PAIRED_IN_EXPECTED:
        path.mkdir(parents=True, exist_ok=True)
        write_snippets((r.snippet for r in records), path / IN_TSV)
        write_labels((r.label for r in records), path / EXPECTED_TSV)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "".join(f"{_snippet_row(r.snippet)}\t{r.label.value}\n" for r in records)
    path.write_text(body, encoding="utf-8", newline="")


# -- stratified splitting --

def _cell_key(record: LabeledSnippet) -> tuple[str, str]:
    # Unthemed snippets form their own stratification cell.
    theme = record.snippet.theme.value if record.snippet.theme is not None else ""
    return (theme, record.label.value)


def _largest_remainder(quotas: Sequence[Fraction], total: int) -> list[int]:
    """Apportion `total` units to parts with fractional quotas: floor each
    quota, then hand the leftover units to the largest remainders."""
    base = [int(q) for q in quotas]  # Fraction.__int__ floors toward zero; quotas >= 0
    leftover = total - sum(base)
    order = sorted(range(len(quotas)), key=lambda p: (-(quotas[p] - base[p]), p))
    for p in order[:leftover]:
        base[p] += 1
    return base


def stratified_split(records: Sequence[LabeledSnippet],
                     ratios: Sequence[float | Fraction],
                     seed: int) -> DatasetSplit:
    """Partition records into train/validation/test.

    Sizes follow largest-remainder apportionment of ratio*N; stratification
    cells are (theme, label) pairs, each shuffled with a per-cell rng derived
    from `seed` so the result is independent of input order grouping.
    """
    if not records:
        raise ValueError("cannot split an empty record list")
    if len(ratios) != 3:
        raise ValueError(f"expected 3 ratios, got {len(ratios)}")
    fracs = [r if isinstance(r, Fraction) else Fraction(r) for r in ratios]
    if any(f < 0 for f in fracs):
        raise ValueError("ratios must be non-negative")
    if abs(float(sum(fracs)) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {float(sum(fracs))!r}")
    fracs = [f / sum(fracs) for f in fracs]  # exact unit sum keeps quotas consistent

    seen: set[str] = set()
    for r in records:
        if r.id in seen:
            raise ValueError(f"duplicate snippet id {r.id!r}")
        seen.add(r.id)

    n = len(records)
    targets = _largest_remainder([f * n for f in fracs], n)

    cells: dict[tuple[str, str], list[LabeledSnippet]] = {}
    for r in records:
        cells.setdefault(_cell_key(r), []).append(r)
    cell_keys = sorted(cells)

    # Per-cell floors leave each cell 0..2 leftover units to place; parts must
    # end exactly on their global targets, and every cell/part allocation must
    # stay within one of its fractional quota (each cell gives a part either
    # floor(quota) or floor(quota)+1 members).
    quotas = {c: [f * len(cells[c]) for f in fracs] for c in cell_keys}
    base = {c: [int(q) for q in quotas[c]] for c in cell_keys}
    capacity = [targets[p] - sum(base[c][p] for c in cell_keys) for p in range(3)]
    two_left = [c for c in cell_keys if len(cells[c]) - sum(base[c]) == 2]
    one_left = [c for c in cell_keys if len(cells[c]) - sum(base[c]) == 1]

    # A cell with 2 leftover units feeds every part except one avoided part.
    # Per-part avoidance quotas are forced below D=len(two_left) capacity and
    # always satisfiable (Gale-Ryser conditions hold for these demands).
    avoid_quota = [max(0, len(two_left) - capacity[p]) for p in range(3)]
    slack = len(two_left) - sum(avoid_quota)
    assert slack >= 0
    for p in sorted(range(3), key=lambda p: (capacity[p], p)):
        give = min(slack, len(two_left) - avoid_quota[p])
        avoid_quota[p] += give
        slack -= give
    assert slack == 0
    unavoided = list(two_left)
    for p in range(3):
        chosen = sorted(unavoided, key=lambda c: (quotas[c][p] - base[c][p], c))[:avoid_quota[p]]
        for c in chosen:
            unavoided.remove(c)
            for q in range(3):
                if q != p:
                    base[c][q] += 1
                    capacity[q] -= 1
    assert not unavoided

    # Cells with a single leftover unit: award by largest fractional remainder
    # wherever capacity remains.
    pairs = sorted(((c, p) for c in one_left for p in range(3)),
                   key=lambda cp: (-(quotas[cp[0]][cp[1]] - base[cp[0]][cp[1]]), cp[0], cp[1]))
    unassigned = set(one_left)
    for c, p in pairs:
        if c in unassigned and capacity[p] > 0:
            base[c][p] += 1
            capacity[p] -= 1
            unassigned.remove(c)
    assert not unassigned and not any(capacity)

    parts: tuple[list[LabeledSnippet], ...] = ([], [], [])
    for c in cell_keys:
        members = sorted(cells[c], key=lambda r: r.id)
        random.Random(f"{seed}|{c[0]}|{c[1]}").shuffle(members)
        lo = 0
        for p in range(3):
            parts[p].extend(members[lo:lo + base[c][p]])
            lo += base[c][p]

    return DatasetSplit(train=tuple(parts[0]), validation=tuple(parts[1]),
                        test=tuple(parts[2]), seed=seed)


# -- distribution reporting --

def _percent(count: int, total: int) -> float:
    exact = Decimal(100 * count) / Decimal(total)
    return float(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def distribution_report(records: Sequence[LabeledSnippet] | Sequence[Snippet]) -> DistributionReport:
    """Per-theme and per-label counts with percentages rounded half-up to
    2 decimals. Accepts labeled or bare snippets; empty input yields total 0."""
    total = len(records)
    if total == 0:
        return DistributionReport(total=0, themes=(), labels=())

    theme_counts: dict[str, int] = {}
    label_counts: dict[str, int] = {}
    labeled = True
    for r in records:
        snippet = r.snippet if isinstance(r, LabeledSnippet) else r
        theme = snippet.theme.value if snippet.theme is not None else "Unthemed"
        theme_counts[theme] = theme_counts.get(theme, 0) + 1
        if isinstance(r, LabeledSnippet):
            name = "Interesting" if r.label is Label.INTERESTING else "NotInteresting"
            label_counts[name] = label_counts.get(name, 0) + 1
        else:
            labeled = False

    themes = tuple(ReportRow(name, count, _percent(count, total))
                   for name, count in sorted(theme_counts.items(), key=lambda kv: (-kv[1], kv[0])))
    labels = ()
    if labeled:
        labels = tuple(ReportRow(name, count, _percent(count, total))
                       for name, count in sorted(label_counts.items(), key=lambda kv: (-kv[1], kv[0])))
    return DistributionReport(total=total, themes=themes, labels=labels)
