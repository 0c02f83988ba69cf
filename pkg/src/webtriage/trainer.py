"""Class-weighted logistic classifier over sparse features.

Training recipe: Adam (beta1=0.99, beta2=0.999, eps=1e-8), learning rate
linear 0->peak over the warmup steps then linear peak->0, batches of 64,
validation F1 every 200 optimizer steps, early stop after 10 consecutive
validations without strict improvement, at most 5 epochs, and the returned
parameters come from the best validation point.

The default peak rate of 2e-5 suits warm-started models; training this
linear model from zero initialization needs a far larger step, so the
documented preset (`linear_optimizer_config`) uses peak 1e-2. Optimizer
mechanics are identical either way.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import DatasetFormatError
from .features import FeatureVector
from .metrics import confusion, metrics

log = logging.getLogger(__name__)

PROB_CLAMP = 1e-12
LINEAR_PEAK_LR = 1e-2

Sample = tuple[FeatureVector, int]


@dataclass
class ModelParams:
    w: np.ndarray  # float64, shape (n_features,)
    b: float

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=np.float64)
        if not (np.isfinite(self.w).all() and math.isfinite(self.b)):
            raise ValueError("model parameters must be finite")

    @property
    def n_features(self) -> int:
        return len(self.w)

    @classmethod
    def zeros(cls, n_features: int) -> "ModelParams":
        return cls(w=np.zeros(n_features, dtype=np.float64), b=0.0)


@dataclass(frozen=True)
class OptimizerConfig:
    beta1: float = 0.99
    beta2: float = 0.999
    eps: float = 1e-8
    peak_lr: float = 2e-5
    warmup_steps: int = 500
    total_steps: int | None = None  # derived from the data when left unset

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be non-negative")
        if self.total_steps is not None and self.warmup_steps > self.total_steps:
            raise ValueError("warmup_steps cannot exceed total_steps")


def linear_optimizer_config(**overrides) -> OptimizerConfig:
    """The documented preset for training the linear model from scratch."""
    return OptimizerConfig(**{"peak_lr": LINEAR_PEAK_LR, **overrides})


@dataclass(frozen=True)
class TrainingConfig:
    max_epochs: int = 5
    batch_size: int = 64
    validate_every: int = 200
    patience: int = 10
    pos_weight: float = 1.0
    neg_weight: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("max_epochs", "batch_size", "validate_every", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.pos_weight <= 0.0 or self.neg_weight <= 0.0:
            raise ValueError("class weights must be positive")


@dataclass
class AdamState:
    m: np.ndarray  # first moment, shape (n_features+1,), bias slot last
    v: np.ndarray  # second moment, same shape
    t: int = 0

    @classmethod
    def zeros(cls, n_features: int) -> "AdamState":
        return cls(m=np.zeros(n_features + 1), v=np.zeros(n_features + 1), t=0)


class StopReason(Enum):
    EARLY_STOPPED = "EarlyStopped"
    MAX_EPOCHS = "MaxEpochs"


@dataclass(frozen=True)
class ValidationRecord:
    step: int
    f1: float
    loss: float
    lr: float


@dataclass
class TrainingLog:
    records: list[ValidationRecord] = field(default_factory=list)
    best_step: int = 0
    stop_reason: StopReason = StopReason.MAX_EPOCHS

    @property
    def best_f1(self) -> float:
        for r in self.records:
            if r.step == self.best_step:
                return r.f1
        return float("nan")

    def render(self) -> str:
        lines = [f"#training-log\tv1\tbest_step={self.best_step}\tstop={self.stop_reason.value}"]
        for r in self.records:
            lines.append(f"{r.step}\t{float(r.f1)!r}\t{float(r.loss)!r}\t{float(r.lr)!r}")
        return "\n".join(lines) + "\n"


# -- CSR plumbing --

def build_csr(vectors: Sequence[FeatureVector]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pack sparse vectors into CSR arrays (indptr, indices, data)."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, fv in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(fv.indices)
    indices = np.empty(indptr[-1], dtype=np.int64)
    data = np.empty(indptr[-1], dtype=np.float64)
    for i, fv in enumerate(vectors):
        indices[indptr[i]:indptr[i + 1]] = fv.indices
        data[indptr[i]:indptr[i + 1]] = fv.values
    return indptr, indices, data


def _theta(params: ModelParams) -> np.ndarray:
    return np.append(params.w, params.b)


# -- elementary operations --

def sigmoid(z: float) -> float:
    """Numerically stable logistic function (no overflow for |z| up to 1e3)."""
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def predict_proba(params: ModelParams, x: FeatureVector) -> float:
    z = params.b + sum(params.w[i] * v for i, v in zip(x.indices, x.values))
    return sigmoid(z)


def predict_many(params: ModelParams, vectors: Sequence[FeatureVector]) -> np.ndarray:
    indptr, indices, data = build_csr(vectors)
    return kernels.predict_probs(indptr, indices, data, _theta(params))


def _clamped_loss(probs: np.ndarray, y: np.ndarray, sw: np.ndarray) -> float:
    p = np.clip(probs, PROB_CLAMP, 1.0 - PROB_CLAMP)
    per_sample = -sw * (y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(per_sample.mean())


def _sample_weights(y: np.ndarray, cfg: TrainingConfig) -> np.ndarray:
    return np.where(y == 1.0, cfg.pos_weight, cfg.neg_weight)


def weighted_loss(batch: Sequence[Sample], params: ModelParams,
                  weights: tuple[float, float] = (1.0, 0.5)) -> float:
    """Mean of -w_y * [y ln p + (1-y) ln(1-p)] with p clamped away from {0,1}.
    `weights` is (positive, negative)."""
    if not batch:
        raise ValueError("batch must be nonempty")
    probs = predict_many(params, [fv for fv, _ in batch])
    y = np.array([float(label) for _, label in batch])
    sw = np.where(y == 1.0, weights[0], weights[1])
    return _clamped_loss(probs, y, sw)


def gradient(batch: Sequence[Sample], params: ModelParams,
             weights: tuple[float, float] = (1.0, 0.5)) -> tuple[np.ndarray, float]:
    """Analytic gradient of weighted_loss over (w, b):
    mean of w_y*(p-y)*x and mean of w_y*(p-y)."""
    if not batch:
        raise ValueError("batch must be nonempty")
    indptr, indices, data = build_csr([fv for fv, _ in batch])
    theta = _theta(params)
    probs = kernels.predict_probs(indptr, indices, data, theta)
    y = np.array([float(label) for _, label in batch])
    sw = np.where(y == 1.0, weights[0], weights[1])
    grad = np.empty_like(theta)
    kernels.accumulate_gradient(indptr, indices, data, y, sw, probs, grad)
    return grad[:-1], float(grad[-1])


def lr_at(step: int, config: OptimizerConfig) -> float:
    """Linear 0->peak over [0, warmup], then linear peak->0 over
    [warmup, total]. Requires config.total_steps."""
    total = config.total_steps
    if total is None:
        raise ValueError("OptimizerConfig.total_steps must be set to evaluate the schedule")
    if not 0 <= step <= total:
        raise ValueError(f"step {step} outside [0, {total}]")
    warmup = config.warmup_steps
    if step <= warmup:
        if warmup == 0:
            return config.peak_lr
        return config.peak_lr * (step / warmup)
    return config.peak_lr * ((total - step) / (total - warmup))


def adam_step(params: ModelParams, state: AdamState, grad_w: np.ndarray, grad_b: float,
              lr: float, config: OptimizerConfig) -> tuple[ModelParams, AdamState]:
    """One functional Adam step (bias-corrected moments); the in-place kernel
    does the arithmetic, so trajectories match fit() exactly."""
    grad = np.append(np.asarray(grad_w, dtype=np.float64), grad_b)
    if not np.isfinite(grad).all():
        raise ValueError("gradient has non-finite components")
    theta = _theta(params)
    m, v, t = state.m.copy(), state.v.copy(), state.t + 1
    kernels.adam_update(theta, m, v, grad, t, lr, config.beta1, config.beta2, config.eps)
    return ModelParams(w=theta[:-1], b=float(theta[-1])), AdamState(m=m, v=v, t=t)


# -- the training loop --

def _permute_csr(indptr, indices, data, order):
    lengths = np.diff(indptr)
    new_indptr = np.zeros(len(order) + 1, dtype=np.int64)
    new_indptr[1:] = np.cumsum(lengths[order])
    gather = np.concatenate(
        [np.arange(indptr[o], indptr[o + 1]) for o in order]) if len(indices) else np.empty(0, dtype=np.int64)
    return new_indptr, indices[gather.astype(np.int64)], data[gather.astype(np.int64)]


def fit(train: Sequence[Sample], validation: Sequence[Sample],
        train_config: TrainingConfig, optimizer_config: OptimizerConfig,
        n_features: int,
        metric_fn: Callable[[ModelParams, int], float] | None = None,
        ) -> tuple[ModelParams, TrainingLog]:
    """Train from zero initialization and return the parameters of the best
    validation point plus the full validation log.

    `metric_fn` overrides the validation metric (default: positive-class F1
    at threshold 0.5); training harnesses use it to script validation scores.
    """
    if not train or not validation:
        raise ValueError("train and validation sets must be nonempty")

    indptr, indices, data = build_csr([fv for fv, _ in train])
    y = np.array([float(label) for _, label in train])
    sw = _sample_weights(y, train_config)
    val_indptr, val_indices, val_data = build_csr([fv for fv, _ in validation])
    val_y = np.array([float(label) for _, label in validation])
    val_sw = _sample_weights(val_y, train_config)
    if not val_y.any():
        log.warning("validation set has no positive samples; F1 is degenerate (always 0)")

    n = len(train)
    steps_per_epoch = math.ceil(n / train_config.batch_size)
    total = optimizer_config.total_steps or steps_per_epoch * train_config.max_epochs
    schedule = replace(optimizer_config,
                       warmup_steps=min(optimizer_config.warmup_steps, total),
                       total_steps=total)

    theta = np.zeros(n_features + 1, dtype=np.float64)
    m = np.zeros(n_features + 1)
    v = np.zeros(n_features + 1)
    grad = np.empty(n_features + 1)
    rng = random.Random(train_config.seed)

    training_log = TrainingLog()
    best_f1 = -1.0
    best_theta = theta.copy()
    stale = 0
    t = 0

    def current_params() -> ModelParams:
        return ModelParams(w=theta[:-1].copy(), b=float(theta[-1]))

    def validate() -> bool:
        """Record one validation; True means training should stop."""
        nonlocal best_f1, best_theta, stale
        val_probs = kernels.predict_probs(val_indptr, val_indices, val_data, theta)
        if metric_fn is not None:
            f1 = float(metric_fn(current_params(), t))
        else:
            f1 = metrics(confusion((val_probs >= 0.5).astype(int), val_y.astype(int))).f1
        loss = _clamped_loss(val_probs, val_y, val_sw)
        training_log.records.append(ValidationRecord(step=t, f1=f1, loss=loss, lr=lr_at(t, schedule)))
        if f1 > best_f1:
            best_f1 = f1
            best_theta = theta.copy()
            training_log.best_step = t
            stale = 0
        else:
            stale += 1
        return stale >= train_config.patience

    stopped_early = False
    for _ in range(train_config.max_epochs):
        order = np.array(rng.sample(range(n), n))
        ep_indptr, ep_indices, ep_data = _permute_csr(indptr, indices, data, order)
        ep_y, ep_sw = y[order], sw[order]
        for lo in range(0, n, train_config.batch_size):
            if t >= total:
                break
            hi = min(lo + train_config.batch_size, n)
            probs = kernels.predict_probs(ep_indptr[lo:hi + 1], ep_indices, ep_data, theta)
            kernels.accumulate_gradient(ep_indptr[lo:hi + 1], ep_indices, ep_data,
                                        ep_y[lo:hi], ep_sw[lo:hi], probs, grad)
            t += 1
            kernels.adam_update(theta, m, v, grad, t, lr_at(t, schedule),
                                schedule.beta1, schedule.beta2, schedule.eps)
            if t % train_config.validate_every == 0 and validate():
                stopped_early = True
                break
        if stopped_early or t >= total:
            break

    if stopped_early:
        training_log.stop_reason = StopReason.EARLY_STOPPED
    else:
        training_log.stop_reason = StopReason.MAX_EPOCHS
        # Exhausted all epochs off a validation boundary: take one last reading.
        if not training_log.records or training_log.records[-1].step != t:
            validate()

    return ModelParams(w=best_theta[:-1].copy(), b=float(best_theta[-1])), training_log


# -- model persistence --

_MODEL_HEADER = "webtriage-model\tv1"


def save_model(params: ModelParams, path: str | Path, vocab_hash: str | None = None) -> None:
    """Plain-text model file: versioned header, vocabulary hash, bias, then
    the sparse nonzero weights as index<TAB>value rows. Floats are written
    with repr() so the file round-trips bit-exactly."""
    lines = [_MODEL_HEADER,
             f"n_features\t{params.n_features}",
             f"vocab_sha256\t{vocab_hash or '-'}",
             f"bias\t{float(params.b)!r}"]
    for i in np.flatnonzero(params.w):
        lines.append(f"{int(i)}\t{float(params.w[i])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def load_model(path: str | Path) -> tuple[ModelParams, str | None]:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _MODEL_HEADER:
        raise DatasetFormatError("not a webtriage model file", str(path), 1)
    try:
        n_features = int(lines[1].split("\t")[1])
        vocab_hash = lines[2].split("\t")[1]
        b = float(lines[3].split("\t")[1])
        w = np.zeros(n_features, dtype=np.float64)
        for i, line in enumerate(lines[4:], start=5):
            idx, value = line.split("\t")
            w[int(idx)] = float(value)
    except (IndexError, ValueError) as exc:
        raise DatasetFormatError(f"malformed model file: {exc}", str(path)) from exc
    return ModelParams(w=w, b=b), None if vocab_hash == "-" else vocab_hash


def model_file_hash(path: str | Path) -> str:
    """Content hash of a model file; used as the serving model version tag."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
