"""Replay buffer plus its update and retrieval strategies."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .knn_shapley import knn_sv_matrix
from .numeric import RngStream, sample_without_replacement
from .scoring import ScoreVariant, asv, asv_mu, dist_mu_score, dist_score

log = logging.getLogger(__name__)

Extractor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Sample:
    stream_index: int
    features: np.ndarray
    label: int
    task_id: int = 0

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return (
            self.stream_index == other.stream_index
            and self.label == other.label
            and self.task_id == other.task_id
            and np.array_equal(self.features, other.features)
        )

    def __hash__(self):
        return hash((self.stream_index, self.label, self.task_id))


@dataclass
class MemoryBuffer:
    capacity: int
    slots: list[Sample] = field(default_factory=list)
    seen: int = 0

    def __post_init__(self):
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")

    def __len__(self):
        return len(self.slots)

    @property
    def is_full(self) -> bool:
        return len(self.slots) >= self.capacity


@dataclass
class RetrievalConfig:
    """Knobs of the Shapley-based retrieval and update.

    ``subsample_size=None`` means ``subsample_per_class`` per class present in
    memory, capped at ``subsample_max``.
    """

    memory_batch_size: int = 10
    subsample_size: int | None = None
    subsample_per_class: int = 5
    subsample_max: int = 50
    candidate_size: int = 100
    knn_k: int = 5
    score_variant: ScoreVariant = ScoreVariant.ASV_MU
    minority_inputs_in_eval: bool = True

    def __post_init__(self):
        self.score_variant = ScoreVariant(self.score_variant)
        counts = {
            "memory_batch_size": self.memory_batch_size,
            "subsample_per_class": self.subsample_per_class,
            "subsample_max": self.subsample_max,
            "candidate_size": self.candidate_size,
            "knn_k": self.knn_k,
        }
        if self.subsample_size is not None:
            counts["subsample_size"] = self.subsample_size
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    def n_sub(self, n_classes: int) -> int:
        if self.subsample_size is not None:
            return self.subsample_size
        return min(self.subsample_per_class * n_classes, self.subsample_max)


def _stack(samples: Sequence[Sample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([s.features for s in samples])
    y = np.array([s.label for s in samples], dtype=np.int64)
    return X, y


def reservoir_update(buffer: MemoryBuffer, batch: Sequence[Sample], rng: RngStream) -> MemoryBuffer:
    """Classic reservoir sampling; each streamed item survives with probability M/n."""
    M = buffer.capacity
    start = buffer.seen
    # candidate slot for the item at global position n is uniform on [0, n]
    draws = rng.integers(0, start + np.arange(len(batch)) + 1) if len(batch) else []
    for sample, j in zip(batch, draws):
        if len(buffer.slots) < M:
            buffer.slots.append(sample)
        elif j < M:
            buffer.slots[j] = sample
    buffer.seen += len(batch)
    return buffer


def balanced_subsample(samples: Sequence[Sample], n_sub: int, rng: RngStream) -> list[int]:
    """Indices of a class-balanced subsample of ``samples``.

    Each class present gets ``n_sub // n_classes`` picks (capped by what it
    has); left-over budget is handed out one at a time, round robin over
    classes in ascending label order that still have unused samples.
    """
    if len(samples) == 0:
        raise ValueError("cannot subsample an empty buffer")
    by_class: dict[int, list[int]] = {}
    for i, s in enumerate(samples):
        by_class.setdefault(s.label, []).append(i)
    labels = sorted(by_class)
    # per-class random order; picks are prefixes of it
    shuffled = {
        c: [by_class[c][k] for k in sample_without_replacement(rng, len(by_class[c]), len(by_class[c]))]
        for c in labels
    }
    quota = n_sub // len(labels)
    taken = {c: min(quota, len(shuffled[c])) for c in labels}
    budget = n_sub - sum(taken.values())
    while budget > 0:
        progressed = False
        for c in labels:
            if budget == 0:
                break
            if taken[c] < len(shuffled[c]):
                taken[c] += 1
                budget -= 1
                progressed = True
        if not progressed:
            break
    return [i for c in labels for i in shuffled[c][: taken[c]]]


def retrieve_random(buffer: MemoryBuffer, b_m: int, rng: RngStream) -> list[Sample]:
    if len(buffer) == 0:
        raise ValueError("cannot retrieve from an empty buffer")
    idx = sample_without_replacement(rng, len(buffer), min(b_m, len(buffer)))
    return [buffer.slots[i] for i in idx]


def _top_by_score(scores: np.ndarray, stream_idx: np.ndarray, k: int) -> np.ndarray:
    # primary: score descending, secondary: stream_index ascending
    order = np.lexsort((stream_idx, -scores))
    return order[:k]


def candidate_scores(
    cand: Sequence[Sample],
    sub: Sequence[Sample],
    batch: Sequence[Sample],
    cfg: RetrievalConfig,
    extractor: Extractor,
) -> np.ndarray:
    """Score every candidate against the memory subsample and the input batch."""
    Xc, yc = _stack(cand)
    Xs, ys = _stack(sub)
    Xb, yb = _stack(batch)
    Lc, Ls, Lb = extractor(Xc), extractor(Xs), extractor(Xb)
    variant = cfg.score_variant
    if variant in (ScoreVariant.DIST, ScoreVariant.DIST_MU):
        fn = dist_score if variant is ScoreVariant.DIST else dist_mu_score
        return fn((Lc, yc), (Ls, ys), (Lb, yb))
    sv_mem = knn_sv_matrix(Lc, yc, Ls, ys, cfg.knn_k)
    sv_in = knn_sv_matrix(Lc, yc, Lb, yb, cfg.knn_k)
    return asv(sv_mem, sv_in) if variant is ScoreVariant.ASV else asv_mu(sv_mem, sv_in)


def retrieve_aser(
    buffer: MemoryBuffer,
    input_batch: Sequence[Sample],
    cfg: RetrievalConfig,
    extractor: Extractor,
    rng: RngStream,
) -> list[Sample]:
    """Shapley (or distance) scored retrieval of ``cfg.memory_batch_size`` samples.

    Draws a class-balanced evaluation subsample from memory, scores up to
    ``cfg.candidate_size`` of the remaining samples and returns the highest
    scoring ones. Falls back to random retrieval while the buffer is still
    filling or when nothing is left after subsampling.
    """
    if len(buffer) == 0:
        raise ValueError("cannot retrieve from an empty buffer")
    if len(input_batch) == 0:
        raise ValueError("input batch is empty")
    b_m = cfg.memory_batch_size
    if not buffer.is_full:
        return retrieve_random(buffer, b_m, rng)

    # canonical slot order so the result does not depend on buffer layout
    mem = sorted(buffer.slots, key=lambda s: s.stream_index)
    n_classes = len({s.label for s in mem})
    sub_idx = balanced_subsample(mem, cfg.n_sub(n_classes), rng)
    in_sub = set(sub_idx)
    rest = [i for i in range(len(mem)) if i not in in_sub]
    if not rest:
        log.info("no candidates left after subsampling; using random retrieval")
        return retrieve_random(buffer, b_m, rng)

    picked = sample_without_replacement(rng, len(rest), min(cfg.candidate_size, len(rest)))
    cand = [mem[rest[k]] for k in sorted(picked)]
    scores = candidate_scores(cand, [mem[i] for i in sub_idx], input_batch, cfg, extractor)
    stream_idx = np.array([s.stream_index for s in cand])
    chosen = [cand[i] for i in _top_by_score(scores, stream_idx, b_m)]

    short = min(b_m, len(mem)) - len(chosen)
    if short > 0:
        used = {s.stream_index for s in chosen}
        pool = [s for s in mem if s.stream_index not in used]
        chosen += [pool[i] for i in sample_without_replacement(rng, len(pool), short)]
    return chosen


def minority_inputs(buffer: MemoryBuffer, batch: Sequence[Sample]) -> list[Sample]:
    """Input samples whose class holds fewer than its even share of memory.

    The share is ``capacity / n`` with ``n`` the number of distinct classes
    in memory and batch together.
    """
    counts: dict[int, int] = {}
    for s in buffer.slots:
        counts[s.label] = counts.get(s.label, 0) + 1
    n_classes = len(set(counts) | {s.label for s in batch})
    share = buffer.capacity / n_classes
    return [s for s in batch if counts.get(s.label, 0) < share]


def sv_update(
    buffer: MemoryBuffer,
    batch: Sequence[Sample],
    cfg: RetrievalConfig,
    extractor: Extractor,
    rng: RngStream,
) -> MemoryBuffer:
    """Keep the samples with the highest mean KNN Shapley value w.r.t. memory.

    While there is room the batch is appended. Afterwards the remaining input
    samples compete, in stream order, against the current lowest-valued
    memory slot outside the evaluation subsample and replace it when their
    mean value is strictly higher.

    With ``cfg.minority_inputs_in_eval`` (the default) input samples whose
    class is under-represented in memory are added to the evaluation set.
    Without it, a class that is absent from memory has no same-label
    evaluation points, its samples never score above zero and it can never
    enter a full buffer.
    """
    M = buffer.capacity
    buffer.seen += len(batch)
    batch = list(batch)
    room = max(M - len(buffer.slots), 0)
    buffer.slots.extend(batch[:room])
    batch = batch[room:]
    if not batch or M == 0:
        return buffer

    n_classes = len({s.label for s in buffer.slots})
    sub_idx = balanced_subsample(buffer.slots, cfg.n_sub(n_classes), rng)
    in_sub = set(sub_idx)
    free_slots = [i for i in range(len(buffer.slots)) if i not in in_sub]
    if not free_slots:
        return buffer

    cand = [buffer.slots[i] for i in free_slots] + batch
    Xc, yc = _stack(cand)
    ev = [buffer.slots[i] for i in sub_idx]
    if cfg.minority_inputs_in_eval:
        ev += minority_inputs(buffer, batch)
    Xs, ys = _stack(ev)
    s_avg = knn_sv_matrix(extractor(Xc), yc, extractor(Xs), ys, cfg.knn_k).average()

    mem_vals = s_avg[: len(free_slots)].copy()
    for sample, value in zip(batch, s_avg[len(free_slots):]):
        k = int(np.argmin(mem_vals))            # first minimum = lowest slot index
        if value > mem_vals[k]:
            buffer.slots[free_slots[k]] = sample
            mem_vals[k] = value
    return buffer
