"""Average accuracy and average forgetting over a lower-triangular accuracy matrix."""
from __future__ import annotations

from typing import Sequence


class AccuracyMatrix:
    """Row ``i`` (0-based) holds accuracies on tasks ``0..i`` after training through task ``i``."""

    def __init__(self, rows: Sequence[Sequence[float]] = ()):
        self.rows: list[list[float]] = []
        for r in rows:
            self.append(r)

    def append(self, row: Sequence[float]) -> None:
        row = [float(a) for a in row]
        if len(row) != len(self.rows) + 1:
            raise ValueError(f"row {len(self.rows) + 1} must have {len(self.rows) + 1} entries, got {len(row)}")
        if any(not 0.0 <= a <= 1.0 for a in row):
            raise ValueError("accuracies must lie in [0, 1]")
        self.rows.append(row)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> float:
        """1-based access ``m[i, j]`` for task ``j`` after task ``i``."""
        i, j = ij
        if not 1 <= j <= i <= len(self.rows):
            raise IndexError(f"a[{i}][{j}] is not defined")
        return self.rows[i - 1][j - 1]


def _resolve_t(m: AccuracyMatrix, T: int | None) -> int:
    T = len(m) if T is None else T
    if T < 1 or T > len(m):
        raise ValueError(f"row {T} is not defined (matrix has {len(m)} rows)")
    return T


def average_accuracy(m: AccuracyMatrix, T: int | None = None) -> float:
    T = _resolve_t(m, T)
    return sum(m.rows[T - 1]) / T


def average_forgetting(m: AccuracyMatrix, T: int | None = None) -> float:
    """Mean drop from each earlier task's best accuracy to its accuracy after task ``T``.

    The best accuracy for task ``j`` is taken over rows ``j..T-1``, the only
    rows where it is defined.
    """
    T = _resolve_t(m, T)
    if T < 2:
        raise ValueError("forgetting needs at least two tasks")
    total = 0.0
    for j in range(1, T):
        best = max(m[l, j] for l in range(j, T))
        total += best - m[T, j]
    return total / (T - 1)
