"""HTTP facade: inquiry -> expansion -> collection -> classification -> ranked
semaphore results, plus the operator feedback endpoint that drives retraining.

Contract (JSON over HTTP):

  POST /inquiries {"text": ...}            -> 202 {"id": ...}
  GET  /inquiries/{id}/results             -> {"status", "model_version", "items": [...]}
  POST /feedback {"snippet_id", "label", "operator_id"}
                                           -> {"remaining": n, "retrain_started": bool}
  GET  /health                             -> 200

Configuration is a TOML file (see `load_service_config`); WEBTRIAGE_BIND and
WEBTRIAGE_MODEL_PATH override the bind address and model path.
"""

from __future__ import annotations

import asyncio
import logging
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from pydantic import BaseModel

from ._time import utc_now
from .collector import (EMPTY_LEXICON, ExpansionLexicon, SearchEngineSpec, expand_query,
                        collect, fixture_engine_from_tsv, load_connector, load_lexicon)
from .corpus import read_dataset, stratified_split
from .errors import ConfigError, WebTriageError
from .features import Vocabulary, load_vocabulary, vectorize
from .trainer import (ModelParams, OptimizerConfig, TrainingConfig, fit,
                      linear_optimizer_config, load_model, model_file_hash, predict_many,
                      save_model)
from .triage import (DEFAULT_RETRAIN_THRESHOLD, FeedbackEvent, FeedbackLabel, FeedbackStore,
                     Thresholds, TriageResult, UnknownSnippetError, classify, merge_feedback,
                     rank, should_retrain)

log = logging.getLogger(__name__)


class InquiryStatus(Enum):
    QUEUED = "queued"
    COLLECTING = "collecting"
    CLASSIFIED = "classified"
    FAILED = "failed"


_STATUS_ORDER = [InquiryStatus.QUEUED, InquiryStatus.COLLECTING,
                 InquiryStatus.CLASSIFIED, InquiryStatus.FAILED]


@dataclass
class InquiryRecord:
    id: str
    text: str
    created_at: datetime
    status: InquiryStatus = InquiryStatus.QUEUED
    queries: tuple[str, ...] = ()
    items: list[TriageResult] = field(default_factory=list)
    model_version: str | None = None
    error: str | None = None

    def advance(self, status: InquiryStatus) -> None:
        if _STATUS_ORDER.index(status) < _STATUS_ORDER.index(self.status):
            raise ValueError(f"inquiry {self.id}: cannot move {self.status.value} -> {status.value}")
        self.status = status


@dataclass(frozen=True)
class EngineConfig:
    name: str
    kind: str      # "fixture_tsv" or "plugin"
    target: str    # fixture TSV path, or module:attribute for plug-ins
    pages_per_query: int = 10
    rate_limit: float = 0.0


@dataclass(frozen=True)
class ServiceConfig:
    bind_address: str = "127.0.0.1:8765"
    model_path: Path | None = None
    vocab_path: Path | None = None
    lexicon_path: Path | None = None
    feedback_journal: Path = Path("feedback.tsv")
    train_dir: Path | None = None  # base training data; enables retraining
    engines: tuple[EngineConfig, ...] = ()
    thresholds: Thresholds = Thresholds()
    retrain_threshold: int = DEFAULT_RETRAIN_THRESHOLD
    request_timeout_seconds: float = 30.0
    synchronous: bool = False  # inline pipeline + retrain (tests, small fixtures)
    pages_per_query: int | None = None
    training: TrainingConfig = TrainingConfig()
    optimizer: OptimizerConfig = linear_optimizer_config()


def load_service_config(path: str | Path) -> ServiceConfig:
    """Parse the TOML config; relative paths resolve against the config file.
    Referenced files must exist. Env overrides: WEBTRIAGE_BIND,
    WEBTRIAGE_MODEL_PATH."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    base = path.parent

    def resolve(key: str, default=None) -> Path | None:
        value = raw.pop(key, default)
        return None if value is None else (base / value)

    bind = raw.pop("bind_address", "127.0.0.1:8765")
    bind = os.environ.get("WEBTRIAGE_BIND") or bind
    model_path = resolve("model_path")
    env_model = os.environ.get("WEBTRIAGE_MODEL_PATH")
    if env_model:
        model_path = Path(env_model)

    engines = tuple(
        EngineConfig(name=e["name"], kind=e.get("kind", "fixture_tsv"),
                     target=str(base / e["target"]) if e.get("kind", "fixture_tsv") == "fixture_tsv"
                     else e["target"],
                     pages_per_query=e.get("pages_per_query", 10),
                     rate_limit=e.get("rate_limit", 0.0))
        for e in raw.pop("engines", []))

    training_raw = raw.pop("training", {})
    opt_keys = {"beta1", "beta2", "eps", "peak_lr", "warmup_steps", "total_steps"}
    try:
        optimizer = linear_optimizer_config(**{k: v for k, v in training_raw.items() if k in opt_keys})
        training = TrainingConfig(**{k: v for k, v in training_raw.items() if k not in opt_keys})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad [training] section: {exc}") from exc

    config = ServiceConfig(
        bind_address=bind,
        model_path=model_path,
        vocab_path=resolve("vocab_path"),
        lexicon_path=resolve("lexicon_path"),
        feedback_journal=resolve("feedback_journal", "feedback.tsv"),
        train_dir=resolve("train_dir"),
        engines=engines,
        thresholds=Thresholds(red=raw.pop("tau_red", 0.7), yellow=raw.pop("tau_yellow", 0.3)),
        retrain_threshold=raw.pop("retrain_threshold", DEFAULT_RETRAIN_THRESHOLD),
        request_timeout_seconds=raw.pop("request_timeout_seconds", 30.0),
        synchronous=raw.pop("synchronous", False),
        pages_per_query=raw.pop("pages_per_query", None),
        training=training,
        optimizer=optimizer,
    )
    if raw:
        raise ConfigError(f"unknown config keys: {sorted(raw)}")
    for name, p in (("model_path", config.model_path), ("vocab_path", config.vocab_path),
                    ("lexicon_path", config.lexicon_path), ("train_dir", config.train_dir)):
        if p is not None and not p.exists():
            raise ConfigError(f"{name} does not exist: {p}")
    for e in config.engines:
        if e.kind == "fixture_tsv" and not Path(e.target).exists():
            raise ConfigError(f"engine {e.name}: fixture file does not exist: {e.target}")
    return config


def build_engines(config: ServiceConfig) -> list[SearchEngineSpec]:
    specs = []
    for e in config.engines:
        if e.kind == "fixture_tsv":
            connector = fixture_engine_from_tsv(e.name, e.target)
        elif e.kind == "plugin":
            connector = load_connector(e.target)
        else:
            raise ConfigError(f"engine {e.name}: unknown kind {e.kind!r}")
        specs.append(SearchEngineSpec(name=e.name, connector=connector,
                                      pages_per_query=e.pages_per_query,
                                      rate_limit=e.rate_limit))
    return specs


class TriageService:
    """Application core behind the HTTP layer; all state lives here so the
    pipeline is testable without a server."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.lexicon: ExpansionLexicon = (
            load_lexicon(config.lexicon_path) if config.lexicon_path else EMPTY_LEXICON)
        self.vocabulary: Vocabulary | None = (
            load_vocabulary(config.vocab_path) if config.vocab_path else None)
        self.engines = build_engines(config)
        self._model: tuple[ModelParams, str] | None = None
        if config.model_path and Path(config.model_path).exists():
            params, _ = load_model(config.model_path)
            self._model = (params, model_file_hash(config.model_path))
        self._lock = threading.RLock()
        self._inquiries: dict[str, InquiryRecord] = {}
        self._results: dict[str, TriageResult] = {}   # snippet id -> served result
        self._known_ids: set[str] = set()
        self.store = FeedbackStore(config.feedback_journal, known_ids=self._known_ids)
        self._executor = ThreadPoolExecutor(max_workers=4)
        self._retraining = False

    # -- model handle --

    @property
    def model(self) -> tuple[ModelParams, str] | None:
        with self._lock:
            return self._model

    def _swap_model(self, params: ModelParams, version: str) -> None:
        with self._lock:
            self._model = (params, version)

    @property
    def model_version(self) -> str | None:
        model = self.model
        return model[1] if model else None

    # -- inquiry pipeline --

    def submit_inquiry(self, text: str) -> str:
        if not text.strip():
            raise ValueError("inquiry must be nonempty")
        if self.model is None or self.vocabulary is None:
            raise ModelNotLoadedError("no model loaded")
        record = InquiryRecord(id=uuid.uuid4().hex, text=text, created_at=utc_now())
        with self._lock:
            self._inquiries[record.id] = record
        if self.config.synchronous:
            self._process(record)
        else:
            self._executor.submit(self._process, record)
        return record.id

    def _process(self, record: InquiryRecord) -> None:
        try:
            model = self.model  # one read: the whole inquiry uses one model
            assert model is not None and self.vocabulary is not None
            params, version = model
            with self._lock:
                record.advance(InquiryStatus.COLLECTING)
                record.queries = tuple(expand_query(record.text, self.lexicon))
            snippets, job = collect(record.queries, self.engines,
                                    pages_per_query=self.config.pages_per_query)
            vectors = [vectorize(s.snippet_text, self.vocabulary) for s in snippets]
            probs = predict_many(params, vectors) if snippets else []
            items = rank([classify(s, float(p), self.config.thresholds)
                          for s, p in zip(snippets, probs)])
            with self._lock:
                for item in items:
                    self._results[item.snippet.id] = item
                    self._known_ids.add(item.snippet.id)
                record.items = items
                record.model_version = version
                record.advance(InquiryStatus.CLASSIFIED)
        except Exception as exc:
            log.exception("inquiry %s failed", record.id)
            with self._lock:
                record.error = str(exc)
                record.status = InquiryStatus.FAILED

    def get_inquiry(self, inquiry_id: str) -> InquiryRecord | None:
        with self._lock:
            return self._inquiries.get(inquiry_id)

    def results_payload(self, record: InquiryRecord) -> dict:
        with self._lock:
            payload: dict = {"status": record.status.value}
            if record.status is InquiryStatus.FAILED:
                payload["error"] = record.error
            if record.status is InquiryStatus.CLASSIFIED:
                payload["model_version"] = record.model_version
                payload["items"] = [_item_json(item) for item in record.items]
            return payload

    # -- feedback and retraining --

    def record_feedback(self, snippet_id: str, label: FeedbackLabel,
                        operator_id: str) -> tuple[int, bool]:
        """Returns (decisions remaining until retrain, retrain started)."""
        with self._lock:
            served = self._results.get(snippet_id)
        if served is None:
            raise UnknownSnippetError(f"unknown snippet id {snippet_id!r}")
        event = FeedbackEvent(snippet_id=snippet_id, label=label,
                              prior_verdict=served.verdict, timestamp=utc_now(),
                              operator_id=operator_id)
        self.store.record(event)

        retrain_started = False
        if should_retrain(self.store, self.config.retrain_threshold) and self._can_retrain():
            with self._lock:
                if not self._retraining:
                    self._retraining = True
                    retrain_started = True
            if retrain_started:
                if self.config.synchronous:
                    self._retrain()
                else:
                    self._executor.submit(self._retrain)
        remaining = max(0, self.config.retrain_threshold - self.store.decisions_since_retrain)
        return remaining, retrain_started

    def _can_retrain(self) -> bool:
        return (self.config.train_dir is not None and self.vocabulary is not None
                and self.config.model_path is not None)

    def _retrain(self) -> None:
        """Retrain on base data merged with feedback, swap the model atomically,
        then journal the retrain so the decision counter resets."""
        try:
            base = read_dataset(self.config.train_dir)
            with self._lock:
                snippet_objs = {sid: r.snippet for sid, r in self._results.items()}
            merged = merge_feedback(base, self.store, snippet_objs)
            split = stratified_split(merged, (Fraction(9, 10), Fraction(1, 10), Fraction(0)),
                                     seed=self.config.training.seed)
            train, validation = list(split.train), list(split.validation)
            if not validation:
                validation = train
            vocab = self.vocabulary

            def samples(records):
                return [(vectorize(r.snippet.snippet_text, vocab),
                         1 if r.label.value == "1" else 0) for r in records]

            params, _ = fit(samples(train), samples(validation),
                            self.config.training, self.config.optimizer, len(vocab))
            tmp = Path(str(self.config.model_path) + ".tmp")
            save_model(params, tmp, vocab_hash=vocab.content_hash())
            os.replace(tmp, self.config.model_path)
            version = model_file_hash(self.config.model_path)
            self._swap_model(params, version)
            self.store.mark_retrained(version)
        except Exception:
            log.exception("retraining failed")
        finally:
            with self._lock:
                self._retraining = False


class ModelNotLoadedError(WebTriageError):
    pass


class InquiryBody(BaseModel):
    text: str


class FeedbackBody(BaseModel):
    snippet_id: str
    label: str
    operator_id: str = "anonymous"


def _item_json(item: TriageResult) -> dict:
    s = item.snippet
    return {
        "id": s.id, "query": s.query, "engine": s.engine, "url": s.url,
        "title": s.title, "snippet_text": s.snippet_text,
        "theme": s.theme.value if s.theme else None,
        "p": item.probability, "verdict": item.verdict.value,
    }


def create_app(config_or_service: ServiceConfig | TriageService):
    """Build the FastAPI application around a TriageService."""
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import JSONResponse

    service = (config_or_service if isinstance(config_or_service, TriageService)
               else TriageService(config_or_service))
    app = FastAPI(title="webtriage", version="0.1.0")
    app.state.service = service
    timeout = service.config.request_timeout_seconds

    @app.middleware("http")
    async def enforce_timeout(request, call_next):
        try:
            return await asyncio.wait_for(call_next(request), timeout=timeout)
        except asyncio.TimeoutError:
            return JSONResponse({"detail": "request timed out"}, status_code=504)

    @app.get("/health")
    def health():
        return {"status": "ok", "model_version": service.model_version}

    @app.post("/inquiries", status_code=202)
    def post_inquiry(body: InquiryBody):
        if not body.text.strip():
            raise HTTPException(status_code=422, detail="inquiry text must be nonempty")
        try:
            return {"id": service.submit_inquiry(body.text)}
        except ModelNotLoadedError as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.get("/inquiries/{inquiry_id}/results")
    def get_results(inquiry_id: str):
        record = service.get_inquiry(inquiry_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"unknown inquiry {inquiry_id!r}")
        return service.results_payload(record)

    @app.post("/feedback")
    def post_feedback(body: FeedbackBody):
        try:
            label = FeedbackLabel(body.label)
        except ValueError:
            raise HTTPException(status_code=422,
                                detail=f"label must be one of {[l.value for l in FeedbackLabel]}") from None
        try:
            remaining, started = service.record_feedback(body.snippet_id, label, body.operator_id)
        except UnknownSnippetError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"remaining": remaining, "retrain_started": started}

    return app


def run_server(config_path: str | Path) -> None:
    import uvicorn

    config = load_service_config(config_path)
    host, _, port = config.bind_address.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8765))
