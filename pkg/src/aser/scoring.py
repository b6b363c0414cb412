"""Retrieval scores for memory candidates.

Two families: adversarial Shapley scores built from KNN Shapley matrices, and
the pure-distance ablations computed straight from latent embeddings.  Higher
is better in every variant; ties are left to the caller.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .knn_shapley import ShapleyMatrix
from .numeric import pairwise_distances


class ScoreVariant(str, Enum):
    ASV = "ASV"
    ASV_MU = "ASV_MU"
    DIST = "DIST"
    DIST_MU = "DIST_MU"


def _values(m) -> np.ndarray:
    v = m.values if isinstance(m, ShapleyMatrix) else np.asarray(m, dtype=np.float64)
    v = np.atleast_2d(v)
    if v.size == 0:
        raise ValueError("empty Shapley matrix")
    return v


def _check_pair(sv_mem, sv_input) -> tuple[np.ndarray, np.ndarray]:
    a, b = _values(sv_mem), _values(sv_input)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"candidate count mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def asv(sv_mem, sv_input) -> np.ndarray:
    """Best cooperative value over the memory subsample minus the worst
    (most adversarial) value over the input batch."""
    a, b = _check_pair(sv_mem, sv_input)
    return a.max(axis=1) - b.min(axis=1)


def asv_mu(sv_mem, sv_input) -> np.ndarray:
    """Mean-based counterpart of :func:`asv`."""
    a, b = _check_pair(sv_mem, sv_input)
    return a.mean(axis=1) - b.mean(axis=1)


def _same_label_reduce(D_sub: np.ndarray, y_cand: np.ndarray, y_sub: np.ndarray, reduce):
    """Reduce each candidate's distances over same-label subsample members,
    falling back to the whole subsample when its class is absent."""
    out = np.empty(D_sub.shape[0])
    for i, label in enumerate(y_cand):
        mask = y_sub == label
        out[i] = reduce(D_sub[i, mask]) if mask.any() else reduce(D_sub[i])
    return out


def _dist_common(cand, sub, batch, reduce) -> np.ndarray:
    (Xc, yc), (Xs, ys), (Xb, _) = cand, sub, batch
    if len(Xb) == 0:
        raise ValueError("input batch is empty")
    if len(Xs) == 0:
        raise ValueError("memory subsample is empty")
    yc, ys = np.asarray(yc), np.asarray(ys)
    first = _same_label_reduce(pairwise_distances(Xc, Xs), yc, ys, reduce)
    second = reduce(pairwise_distances(Xc, Xb), axis=1)
    return -(first + second)


def dist_score(candidates, s_sub, input_batch) -> np.ndarray:
    """Negative sum of nearest same-label subsample distance and nearest input distance.

    Each argument is an ``(embeddings, labels)`` pair.
    """
    return _dist_common(candidates, s_sub, input_batch, np.min)


def dist_mu_score(candidates, s_sub, input_batch) -> np.ndarray:
    """Mean-distance counterpart of :func:`dist_score`."""
    return _dist_common(candidates, s_sub, input_batch, np.mean)
