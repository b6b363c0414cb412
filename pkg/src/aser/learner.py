"""One-hidden-layer ReLU classifier and the generic experience-replay training loop.

The network is split into a feature extractor ``x -> relu(W1 x + b1)`` and a
linear head ``z -> W2 z + b2``; Shapley scores are computed on the extractor
output.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .memory import (
    MemoryBuffer,
    RetrievalConfig,
    Sample,
    reservoir_update,
    retrieve_aser,
    retrieve_random,
    sv_update,
)
from .metrics import AccuracyMatrix
from .numeric import RngStream
from .scoring import ScoreVariant
from .stream import TaskStream


class UpdateStrategy(str, Enum):
    RESERVOIR = "RESERVOIR"
    SV = "SV"


class RetrievalStrategy(str, Enum):
    NONE = "NONE"
    RANDOM = "RANDOM"
    ASER = "ASER"
    ASER_MU = "ASER_MU"
    DIST = "DIST"
    DIST_MU = "DIST_MU"


_VARIANT = {
    RetrievalStrategy.ASER: ScoreVariant.ASV,
    RetrievalStrategy.ASER_MU: ScoreVariant.ASV_MU,
    RetrievalStrategy.DIST: ScoreVariant.DIST,
    RetrievalStrategy.DIST_MU: ScoreVariant.DIST_MU,
}


@dataclass
class ClassifierParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray

    NAMES = ("W1", "b1", "W2", "b2")

    def __post_init__(self):
        h, d = self.W1.shape
        C = self.W2.shape[0]
        if self.b1.shape != (h,) or self.W2.shape != (C, h) or self.b2.shape != (C,):
            raise ValueError("inconsistent parameter shapes")

    @property
    def dims(self) -> tuple[int, int, int]:
        h, d = self.W1.shape
        return d, h, self.W2.shape[0]

    @classmethod
    def init(cls, d: int, h: int, C: int, rng: RngStream) -> "ClassifierParams":
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation."""
        a1, a2 = 1 / np.sqrt(d), 1 / np.sqrt(h)
        return cls(
            W1=rng.uniform(-a1, a1, (h, d)),
            b1=rng.uniform(-a1, a1, h),
            W2=rng.uniform(-a2, a2, (C, h)),
            b2=rng.uniform(-a2, a2, C),
        )

    @classmethod
    def zeros(cls, d: int, h: int, C: int) -> "ClassifierParams":
        return cls(np.zeros((h, d)), np.zeros(h), np.zeros((C, h)), np.zeros(C))

    def arrays(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(*(a.copy() for a in self.arrays()))


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    batch_size: int = 10
    hidden_dim: int = 32
    update_strategy: UpdateStrategy = UpdateStrategy.RESERVOIR
    retrieval_strategy: RetrievalStrategy = RetrievalStrategy.RANDOM
    memory_capacity: int = 100
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)

    def __post_init__(self):
        self.update_strategy = UpdateStrategy(self.update_strategy)
        self.retrieval_strategy = RetrievalStrategy(self.retrieval_strategy)
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")
        if self.memory_capacity < 0:
            raise ValueError("memory_capacity must be non-negative")


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def latent(params: ClassifierParams, X: np.ndarray) -> np.ndarray:
    """Extractor output for a batch of inputs, shape ``(n, h)``."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != params.W1.shape[1]:
        raise ValueError(f"input dimension {X.shape[-1]} != {params.W1.shape[1]}")
    return np.maximum(X @ params.W1.T + params.b1, 0.0)


def forward(params: ClassifierParams, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(latent, logits, probs)``; works for a single vector or a batch."""
    z = latent(params, x)
    logits = z @ params.W2.T + params.b2
    return z, logits, _softmax(logits)


def _batch_arrays(batch) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(batch, tuple):
        X, y = batch
        return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)
    X = np.stack([s.features for s in batch])
    y = np.array([s.label for s in batch], dtype=np.int64)
    return X, y


def loss_and_gradients(params: ClassifierParams, batch) -> tuple[float, ClassifierParams]:
    """Mean cross-entropy over ``batch`` and its exact gradient.

    ``batch`` is a list of :class:`Sample` or an ``(X, y)`` pair.
    """
    X, y = _batch_arrays(batch)
    n = len(y)
    if n == 0:
        raise ValueError("empty batch")
    pre = X @ params.W1.T + params.b1
    z = np.maximum(pre, 0.0)
    logits = z @ params.W2.T + params.b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(n), y].mean()

    g_logits = np.exp(log_probs)
    g_logits[np.arange(n), y] -= 1.0
    g_logits /= n
    gW2 = g_logits.T @ z
    gb2 = g_logits.sum(axis=0)
    g_pre = (g_logits @ params.W2) * (pre > 0)
    gW1 = g_pre.T @ X
    gb1 = g_pre.sum(axis=0)
    return float(loss), ClassifierParams(gW1, gb1, gW2, gb2)


def sgd_step(params: ClassifierParams, grads: ClassifierParams, lr: float) -> ClassifierParams:
    for p, g in zip(params.arrays(), grads.arrays()):
        if p.shape != g.shape:
            raise ValueError("gradient shape mismatch")
        p -= lr * g
    return params


def extract_features(params: ClassifierParams, samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    """Latent embeddings and labels of ``samples``."""
    h = params.W1.shape[0]
    if not samples:
        return np.empty((0, h)), np.empty(0, dtype=np.int64)
    X, y = _batch_arrays(samples)
    return latent(params, X), y


def evaluate(params: ClassifierParams, test_set) -> float:
    """Accuracy; argmax ties go to the lower class id."""
    X, y = _batch_arrays(test_set)
    if len(y) == 0:
        raise ValueError("empty test set")
    _, logits, _ = forward(params, X)
    return float(np.mean(np.argmax(logits, axis=1) == y))


def dump_embeddings(path, params: ClassifierParams, groups: dict[str, Sequence[Sample]]) -> None:
    """Write latent vectors to CSV with columns ``stream_index,label,source,l0..``."""
    h = params.W1.shape[0]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stream_index", "label", "source"] + [f"l{k}" for k in range(h)])
        for source, samples in groups.items():
            L, _ = extract_features(params, list(samples))
            for s, row in zip(samples, L):
                w.writerow([s.stream_index, s.label, source] + [repr(float(v)) for v in row])


@dataclass
class TrainResult:
    params: ClassifierParams
    memory: MemoryBuffer
    accuracy: AccuracyMatrix
    losses: list[float] = field(default_factory=list)


def train_continual(
    stream: TaskStream,
    cfg: TrainConfig,
    params: ClassifierParams,
    rng: RngStream,
    dump_dir: Path | None = None,
    dump_prefix: str = "",
) -> TrainResult:
    """Single online pass of experience replay over ``stream``.

    Per incoming batch: retrieve a replay batch from memory, take one SGD
    step on the union, then update memory. The task-boundary flag from the
    stream is only used here to evaluate on all test sets seen so far; the
    retrieval and update strategies never see it.
    """
    memory = MemoryBuffer(cfg.memory_capacity)
    acc = AccuracyMatrix()
    losses: list[float] = []
    rcfg = cfg.retrieval
    if cfg.retrieval_strategy in _VARIANT:
        rcfg = RetrievalConfig(**{**rcfg.__dict__, "score_variant": _VARIANT[cfg.retrieval_strategy]})
    extractor = lambda X: latent(params, X)  # noqa: E731 - always reads current params
    r_retrieve, r_update = rng.child("retrieve"), rng.child("update")
    stream.reset()
    task = 0

    while (nxt := stream.next_batch(cfg.batch_size)) is not None:
        batch, boundary = nxt
        replay: list[Sample] = []
        if cfg.retrieval_strategy is not RetrievalStrategy.NONE and len(memory) > 0:
            if cfg.retrieval_strategy is RetrievalStrategy.RANDOM:
                replay = retrieve_random(memory, rcfg.memory_batch_size, r_retrieve)
            else:
                replay = retrieve_aser(memory, batch, rcfg, extractor, r_retrieve)

        if boundary and dump_dir is not None:
            dump_embeddings(
                Path(dump_dir) / f"{dump_prefix}task{task + 1}.csv",
                params,
                {"memory": memory.slots, "input": batch, "retrieved": replay},
            )

        loss, grads = loss_and_gradients(params, list(batch) + replay)
        sgd_step(params, grads, cfg.learning_rate)
        losses.append(loss)

        if cfg.update_strategy is UpdateStrategy.SV:
            sv_update(memory, batch, rcfg, extractor, r_update)
        else:
            reservoir_update(memory, batch, r_update)

        if boundary:
            acc.append([evaluate(params, stream.test[j]) for j in range(task + 1)])
            task += 1

    return TrainResult(params, memory, acc, losses)
