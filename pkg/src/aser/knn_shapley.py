"""Exact Shapley values of data points under a K-nearest-neighbour utility.

A candidate set is passed as an ``(N, h)`` embedding array plus an ``(N,)``
integer label array; evaluation points likewise. Distances are Euclidean and
ties in distance are resolved by lower candidate index, so every result is
deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from .numeric import argsort_ascending, pairwise_distances

BRUTE_FORCE_MAX_CANDIDATES = 20


def _check_k(K: int) -> None:
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")


def _as_points(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y).astype(np.int64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} embeddings but {y.shape[0]} labels")
    if not np.all(np.isfinite(X)):
        raise ValueError("embeddings contain NaN or Inf")
    return X, y


def knn_utility(X, y, x_eval, y_eval: int, K: int) -> float:
    """Fraction of the K nearest subset members sharing the evaluation label.

    The sum runs over the ``min(K, len(X))`` nearest points but is always
    divided by ``K``; an empty subset scores 0.
    """
    _check_k(K)
    if len(y) == 0:
        return 0.0
    X, y = _as_points(X, y)
    d = pairwise_distances(np.atleast_2d(x_eval), X)[0]
    nearest = argsort_ascending(d)[:K]
    return float(np.sum(y[nearest] == int(y_eval))) / K


def _sv_sorted(match: np.ndarray, K: int) -> np.ndarray:
    """Shapley values for candidates already sorted by distance.

    ``match`` has shape ``(..., N)`` with ``match[..., m-1]`` the indicator that
    the m-th nearest candidate shares the evaluation label.  Starting from the
    farthest point, ``s_N = I_N / max(N, K)`` and

        s_m = s_{m+1} + (I_m - I_{m+1}) / K * min(K, m) / m.

    The ``max(N, K)`` base case equals ``I_N / N`` whenever ``N >= K``; for
    smaller candidate sets the farthest point is always among the K nearest,
    so its value is the per-neighbour utility ``1/K``.

    The recursion is evaluated as a reversed cumulative sum, which performs
    the same float additions in the same order as the explicit loop.
    """
    match = match.astype(np.float64)
    N = match.shape[-1]
    m = np.arange(1, N, dtype=np.float64)
    coef = np.minimum(K, m) / (K * m)
    steps = np.empty_like(match)
    steps[..., -1] = match[..., -1] / max(N, K)
    steps[..., :-1] = (match[..., :-1] - match[..., 1:]) * coef
    return np.cumsum(steps[..., ::-1], axis=-1)[..., ::-1]


def knn_sv_single(X, y, x_eval, y_eval: int, K: int, exact: bool = False):
    """KNN Shapley values of every candidate w.r.t. one evaluation point.

    Args:
        X: candidate embeddings, shape ``(N, h)``.
        y: candidate labels, shape ``(N,)``.
        x_eval: evaluation embedding, shape ``(h,)``.
        y_eval: evaluation label.
        K: number of neighbours in the utility.
        exact: if true, run the recursion in rational arithmetic and return a
            list of :class:`fractions.Fraction`.

    Returns:
        Values in the input order of the candidates (array, or list of
        fractions when ``exact``).
    """
    _check_k(K)
    X, y = _as_points(X, y)
    N = len(y)
    if N == 0:
        raise ValueError("candidate set is empty")
    d = pairwise_distances(np.atleast_2d(x_eval), X)[0]
    order = argsort_ascending(d)
    match = y[order] == int(y_eval)

    if exact:
        sv = [Fraction(0)] * N
        s = Fraction(int(match[-1]), max(N, K))
        sv[order[-1]] = s
        for m in range(N - 1, 0, -1):
            s += Fraction(int(match[m - 1]) - int(match[m]), K) * Fraction(min(K, m), m)
            sv[order[m - 1]] = s
        return sv

    out = np.empty(N)
    out[order] = _sv_sorted(match, K)
    return out


@dataclass(frozen=True)
class ShapleyMatrix:
    """KNN Shapley values, one row per candidate and one column per evaluation point."""

    values: np.ndarray

    @property
    def candidate_count(self) -> int:
        return self.values.shape[0]

    @property
    def eval_count(self) -> int:
        return self.values.shape[1]

    def average(self) -> np.ndarray:
        """Per-candidate mean over evaluation points."""
        return self.values.mean(axis=1)


def knn_sv_matrix(X, y, X_eval, y_eval, K: int) -> ShapleyMatrix:
    """Stack of :func:`knn_sv_single` over every evaluation point.

    Each column is an independent recursion; they are vectorised together
    but nothing is shared between columns.
    """
    _check_k(K)
    X, y = _as_points(X, y)
    X_eval, y_eval = _as_points(X_eval, y_eval)
    if len(y) == 0:
        raise ValueError("candidate set is empty")
    if len(y_eval) == 0:
        raise ValueError("evaluation set is empty")
    D = pairwise_distances(X_eval, X)                 # (N_e, N_c)
    order = np.argsort(D, axis=1, kind="stable")
    match = y[order] == y_eval[:, None]
    sorted_sv = _sv_sorted(match, K)
    values = np.empty_like(sorted_sv)
    np.put_along_axis(values, order, sorted_sv, axis=1)
    return ShapleyMatrix(values.T.copy())


def exact_shapley_bruteforce(X, y, x_eval, y_eval: int, K: int) -> np.ndarray:
    """Shapley values by enumerating every coalition. Test/diagnostic use only.

    Evaluates the classic weighted sum of marginal contributions with
    :func:`knn_utility` as the coalition value. Cost is ``O(2^N)`` so ``N`` is
    capped at :data:`BRUTE_FORCE_MAX_CANDIDATES`.
    """
    _check_k(K)
    X, y = _as_points(X, y)
    N = len(y)
    if N == 0:
        raise ValueError("candidate set is empty")
    if N > BRUTE_FORCE_MAX_CANDIDATES:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_CANDIDATES} candidates, got {N}"
        )

    cache: dict[tuple[int, ...], float] = {}

    def v(subset: tuple[int, ...]) -> float:
        if subset not in cache:
            idx = list(subset)
            cache[subset] = knn_utility(X[idx], y[idx], x_eval, y_eval, K)
        return cache[subset]

    out = np.zeros(N)
    for i in range(N):
        others = [p for p in range(N) if p != i]
        total = 0.0
        for size in range(N):
            weight = 1.0 / math.comb(N - 1, size)
            for S in combinations(others, size):
                with_i = tuple(sorted(S + (i,)))
                total += weight * (v(with_i) - v(S))
        out[i] = total / N
    return out
