"""Small deterministic numeric kernels shared by the rest of the package.

All arithmetic is float64. Randomness goes through :class:`RngStream`, a thin
owner of a numpy ``Generator`` backed by the PCG64 bit generator. PCG64 output
for a given seed is fixed by numpy's stream-compatibility policy for
``random()``, ``integers()`` and ``standard_normal()``, which are the only
draws used here.
"""
from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np


class RngStream:
    """Single-owner seeded random stream.

    Args:
        seed: non-negative integer seed (treated as unsigned 64-bit).
        key: optional extra words mixed into the seed, used by :meth:`child`
            to derive independent sub-streams.
    """

    def __init__(self, seed: int, key: Sequence[int] = ()):
        if seed < 0:
            raise ValueError(f"seed must be non-negative, got {seed}")
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.key = tuple(int(k) for k in key)
        seq = np.random.SeedSequence([self.seed, *self.key])
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def child(self, name: str) -> "RngStream":
        """Independent stream derived from this seed and a string tag."""
        return RngStream(self.seed, self.key + (zlib.crc32(name.encode("utf-8")),))

    def random(self, size=None):
        return self._gen.random(size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size=size)

    def normal(self, size=None) -> np.ndarray:
        return self._gen.standard_normal(size)

    def uniform(self, low: float, high: float, size=None):
        return low + (high - low) * self._gen.random(size)

    def permutation(self, n: int) -> list[int]:
        return sample_without_replacement(self, n, n)


def _as_vector(a) -> np.ndarray:
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    return v


def euclidean_distance(a, b) -> float:
    a, b = _as_vector(a), _as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def pairwise_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Euclidean distances between rows, shape ``(len(A), len(B))``.

    Uses the direct difference form rather than the Gram expansion so that
    coincident points give exactly 0 and results match
    :func:`euclidean_distance` bit for bit.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    diff = A[:, None, :] - B[None, :, :]
    np.multiply(diff, diff, out=diff)  # in place; one fewer large temporary
    return np.sqrt(np.sum(diff, axis=-1))


def argsort_ascending(keys) -> np.ndarray:
    """Stable ascending argsort; equal keys keep their original order."""
    k = np.asarray(keys, dtype=np.float64)
    if k.size and np.isnan(k).any():
        raise ValueError("NaN key in argsort")
    return np.argsort(k, kind="stable")


def sample_without_replacement(rng: RngStream, n: int, k: int) -> list[int]:
    """Draw ``k`` distinct indices from ``range(n)``, uniformly over k-subsets.

    Partial Fisher-Yates shuffle; the returned list is in draw order.
    """
    if k < 0 or n < 0:
        raise ValueError("n and k must be non-negative")
    if k > n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    if k == 0:
        return []
    pool = list(range(n))
    # one vectorised call: offsets j_i uniform in [i, n)
    picks = rng.integers(np.arange(k), n)
    for i, j in enumerate(picks):
        pool[i], pool[j] = pool[j], pool[i]
    return pool[:k]
