"""Query expansion and multi-engine snippet collection.

Engine connectors implement `fetch(query, page_index) -> list of hits`; live
HTML/API connectors are plug-ins loaded from a dotted path, while tests and
headless runs use deterministic fixture engines. Results are canonicalized
(sorted by engine, query, page, rank) before deduplication so output does not
depend on thread scheduling.

Lexicon file: UTF-8 lines "term<TAB>syn1,syn2,..." for synonyms and
"TEMPLATE<TAB>pattern with ⟨slot⟩" for templates; blank lines and lines
starting with '#' are skipped.
"""

from __future__ import annotations

import hashlib
import importlib
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from ._time import utc_now
from .corpus import Snippet
from .errors import DatasetFormatError

SLOT_MARKER = "⟨slot⟩"
_SLOT_ALIASES = ("{slot}",)
DEFAULT_PAGES_PER_QUERY = 10


@dataclass(frozen=True)
class SearchHit:
    url: str
    title: str
    snippet_text: str


class Engine(Protocol):
    def fetch(self, query: str, page: int) -> Sequence[SearchHit]: ...


@dataclass(frozen=True)
class ExpansionLexicon:
    synonyms: dict[str, tuple[str, ...]]  # term -> related terms, order kept
    templates: tuple[str, ...]            # each contains exactly one slot marker

    def __post_init__(self):
        for term, syns in self.synonyms.items():
            if any(s.lower() == term.lower() for s in syns):
                raise ValueError(f"lexicon term {term!r} maps to itself")
        for tpl in self.templates:
            if tpl.count(SLOT_MARKER) != 1:
                raise ValueError(f"template {tpl!r} must contain exactly one {SLOT_MARKER}")


EMPTY_LEXICON = ExpansionLexicon(synonyms={}, templates=())


def load_lexicon(path: str | Path) -> ExpansionLexicon:
    path = Path(path)
    synonyms: dict[str, tuple[str, ...]] = {}
    templates: list[str] = []
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        head, sep, rest = line.partition("\t")
        if not sep:
            raise DatasetFormatError("expected term<TAB>synonyms or TEMPLATE<TAB>pattern",
                                     str(path), i)
        if head == "TEMPLATE":
            tpl = rest
            for alias in _SLOT_ALIASES:
                tpl = tpl.replace(alias, SLOT_MARKER)
            templates.append(tpl)
        else:
            synonyms[head] = tuple(s.strip() for s in rest.split(",") if s.strip())
    try:
        return ExpansionLexicon(synonyms=synonyms, templates=tuple(templates))
    except ValueError as exc:
        raise DatasetFormatError(str(exc), str(path)) from exc


def expand_query(inquiry: str, lexicon: ExpansionLexicon) -> list[str]:
    """Expand an inquiry into a duplicate-free ordered query list: the inquiry
    itself, then one query per synonym substitution (in lexicon order), then
    one per template. Terms match inquiry tokens case-insensitively."""
    if not inquiry.strip():
        raise ValueError("inquiry must be nonempty")
    queries = [inquiry]
    seen = {inquiry}

    def push(q: str) -> None:
        if q not in seen:
            seen.add(q)
            queries.append(q)

    tokens = inquiry.split()
    folded = [t.lower() for t in tokens]
    for term, syns in lexicon.synonyms.items():
        if term.lower() not in folded:
            continue
        for syn in syns:
            push(" ".join(syn if f == term.lower() else tok
                          for tok, f in zip(tokens, folded)))
    for tpl in lexicon.templates:
        push(tpl.replace(SLOT_MARKER, inquiry))
    return queries


# -- deduplication --

def normalize_url(url: str) -> str:
    """Lowercase scheme and host, strip the fragment and any trailing slash."""
    base, _, _ = url.partition("#")
    scheme, sep, rest = base.partition("://")
    if sep:
        host, slash, path = rest.partition("/")
        base = scheme.lower() + sep + host.lower() + (slash + path if path else "")
    return base.rstrip("/")


def _key_material(url: str, snippet_text: str) -> str:
    collapsed = " ".join(snippet_text.lower().split())
    return f"{normalize_url(url)}\x1f{collapsed}"


def dedupe_key(snippet: Snippet) -> str:
    return hashlib.sha256(_key_material(snippet.url, snippet.snippet_text)
                          .encode("utf-8")).hexdigest()


# -- engines --

class FixtureEngine:
    """Deterministic in-memory engine: query -> list of result pages."""

    def __init__(self, name: str, pages_by_query: Mapping[str, Sequence[Sequence[SearchHit]]]):
        self.name = name
        self._pages = {q: [list(page) for page in pages] for q, pages in pages_by_query.items()}

    def fetch(self, query: str, page: int) -> list[SearchHit]:
        pages = self._pages.get(query, [])
        return list(pages[page]) if page < len(pages) else []


def fixture_engine_from_tsv(name: str, path: str | Path) -> FixtureEngine:
    """Load a fixture engine from a TSV of
    query<TAB>page<TAB>rank<TAB>url<TAB>title<TAB>snippet_text rows."""
    path = Path(path)
    rows: dict[str, dict[int, list[tuple[int, SearchHit]]]] = {}
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 6:
            raise DatasetFormatError(f"expected 6 fields, got {len(fields)}", str(path), i)
        query, page, rank, url, title, text = fields
        try:
            rows.setdefault(query, {}).setdefault(int(page), []).append(
                (int(rank), SearchHit(url=url, title=title, snippet_text=text)))
        except ValueError as exc:
            raise DatasetFormatError(f"bad page/rank: {exc}", str(path), i) from exc
    pages_by_query = {}
    for query, pages in rows.items():
        n_pages = max(pages) + 1
        pages_by_query[query] = [
            [hit for _, hit in sorted(pages.get(p, []), key=lambda rh: rh[0])]
            for p in range(n_pages)]
    return FixtureEngine(name, pages_by_query)


def load_connector(target: str):
    """Resolve a plug-in connector from a "module:attribute" dotted path."""
    module_name, sep, attr = target.partition(":")
    if not sep:
        raise ValueError(f"connector target {target!r} must look like module:attribute")
    obj = getattr(importlib.import_module(module_name), attr)
    return obj() if isinstance(obj, type) else obj


@dataclass(frozen=True)
class SearchEngineSpec:
    name: str
    connector: Engine
    pages_per_query: int = DEFAULT_PAGES_PER_QUERY
    rate_limit: float = 1.0  # requests/second; 0 disables limiting

    def __post_init__(self):
        if self.pages_per_query < 1:
            raise ValueError("pages_per_query must be >= 1")
        if self.rate_limit < 0:
            raise ValueError("rate_limit must be >= 0")


class TokenBucket:
    """Thread-safe token bucket: `rate` tokens/second, burst of one second."""

    def __init__(self, rate: float, clock=time.monotonic, sleep=time.sleep):
        self.rate = rate
        self.capacity = max(rate, 1.0)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        if self.rate <= 0:
            return
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


@dataclass
class EngineStats:
    fetched: int = 0   # raw hits returned by the engine
    deduped: int = 0   # snippets retained after deduplication
    failures: int = 0  # failed page fetches and malformed hits

    def __post_init__(self):
        if self.deduped > self.fetched:
            raise ValueError("deduped cannot exceed fetched")


@dataclass
class CollectionJob:
    queries: tuple[str, ...]
    engines: tuple[str, ...]
    started_at: datetime
    finished_at: datetime | None = None
    stats: dict[str, EngineStats] = field(default_factory=dict)
    status: str = "ok"  # "warning" when nothing could be collected
    warnings: list[str] = field(default_factory=list)


def _as_hit(raw) -> SearchHit:
    if isinstance(raw, SearchHit):
        return raw
    url, title, text = raw
    return SearchHit(url=url, title=title, snippet_text=text)


def collect(queries: Sequence[str], engines: Sequence[SearchEngineSpec],
            pages_per_query: int | None = None, max_workers: int = 8,
            now: Callable[[], datetime] = utc_now) -> tuple[list[Snippet], CollectionJob]:
    """Fetch up to pages_per_query SERP pages per (query, engine), deduplicate
    by dedupe_key, and stamp each snippet with its query, engine and
    collection time. Engine failures are counted, never fatal; if nothing at
    all could be collected despite failures the job status is "warning"."""
    if not queries:
        raise ValueError("queries must be nonempty")
    job = CollectionJob(queries=tuple(queries), engines=tuple(e.name for e in engines),
                        started_at=now())
    for spec in engines:
        job.stats[spec.name] = EngineStats()
    limiters = {spec.name: TokenBucket(spec.rate_limit) for spec in engines}
    stats_lock = threading.Lock()
    raw: list[tuple[str, str, int, int, SearchHit]] = []

    def fetch_pair(spec: SearchEngineSpec, query: str) -> list[tuple[str, str, int, int, SearchHit]]:
        pages = pages_per_query if pages_per_query is not None else spec.pages_per_query
        hits = []
        for page in range(pages):
            limiters[spec.name].acquire()
            try:
                results = spec.connector.fetch(query, page)
            except Exception as exc:
                with stats_lock:
                    job.stats[spec.name].failures += 1
                    job.warnings.append(f"{spec.name}: {query!r} page {page}: {exc}")
                continue
            for rank, hit in enumerate(results):
                hits.append((spec.name, query, page, rank, _as_hit(hit)))
        return hits

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(fetch_pair, spec, q) for spec in engines for q in queries]
        for future in futures:
            raw.extend(future.result())

    raw.sort(key=lambda item: item[:4])
    collected_at = now()
    snippets: list[Snippet] = []
    seen_keys: set[str] = set()
    for engine_name, query, page, rank, hit in raw:
        job.stats[engine_name].fetched += 1
        key = hashlib.sha256(_key_material(hit.url, hit.snippet_text).encode("utf-8")).hexdigest()
        if key in seen_keys:
            continue
        try:
            snippet = Snippet(id=key, query=query, engine=engine_name, url=hit.url,
                              title=hit.title, snippet_text=hit.snippet_text,
                              collected_at=collected_at)
        except ValueError:
            job.stats[engine_name].failures += 1
            continue
        seen_keys.add(key)
        job.stats[engine_name].deduped += 1
        snippets.append(snippet)

    job.finished_at = now()
    if not snippets and any(s.failures for s in job.stats.values()):
        job.status = "warning"
        job.warnings.append("no engine returned any results")
    return snippets, job
