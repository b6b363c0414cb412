"""Task-ordered data streams.

A :class:`TaskStream` holds the training samples of each task (shuffled
within the task) and one held-out test set per task. ``next_batch`` walks the
training data once, never crossing a task boundary, and reports when a batch
closes a task segment so the evaluation harness can record accuracies.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .memory import Sample
from .numeric import RngStream


@dataclass
class TaskStreamSpec:
    num_tasks: int = 5
    classes_per_task: int = 2
    dim: int = 20
    train_per_class: int = 1000
    test_per_class: int = 100
    mean_radius: float = 3.0
    stddev: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        for name in ("num_tasks", "classes_per_task", "dim", "train_per_class", "test_per_class"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.mean_radius > 0:
            raise ValueError("mean_radius must be positive")
        if not self.stddev >= 0:
            raise ValueError("stddev must be non-negative")


@dataclass
class TaskStream:
    train: list[list[Sample]]
    test: list[list[Sample]]
    _task: int = field(default=0, repr=False)
    _pos: int = field(default=0, repr=False)

    @property
    def num_tasks(self) -> int:
        return len(self.train)

    @property
    def dim(self) -> int:
        for seg in self.train + self.test:
            if seg:
                return len(seg[0].features)
        raise ValueError("stream holds no samples")

    @property
    def num_classes(self) -> int:
        labels = {s.label for seg in self.train + self.test for s in seg}
        return max(labels) + 1 if labels else 0

    def reset(self) -> None:
        self._task, self._pos = 0, 0

    def next_batch(self, b: int) -> tuple[list[Sample], bool] | None:
        """Next ``<= b`` training samples and whether they end a task.

        Returns ``None`` once the stream is exhausted.
        """
        if b < 1:
            raise ValueError("batch size must be >= 1")
        while self._task < len(self.train) and self._pos >= len(self.train[self._task]):
            self._task, self._pos = self._task + 1, 0
        if self._task >= len(self.train):
            return None
        seg = self.train[self._task]
        batch = seg[self._pos : self._pos + b]
        self._pos += len(batch)
        return batch, self._pos >= len(seg)

    def iid_shuffled(self, rng: RngStream) -> "TaskStream":
        """Same segment lengths and test sets, training samples shuffled across tasks."""
        flat = [s for seg in self.train for s in seg]
        flat = [flat[i] for i in rng.permutation(len(flat))]
        segs, start = [], 0
        for seg in self.train:
            segs.append(flat[start : start + len(seg)])
            start += len(seg)
        return TaskStream(segs, self.test)


def generate_synthetic_stream(spec: TaskStreamSpec, rng: RngStream | None = None) -> TaskStream:
    """Gaussian class clusters whose means lie on a sphere, split into tasks by class id."""
    spec.validate()
    rng = rng if rng is not None else RngStream(spec.seed)
    n_classes = spec.num_tasks * spec.classes_per_task
    means = rng.normal((n_classes, spec.dim))
    means *= spec.mean_radius / np.linalg.norm(means, axis=1, keepdims=True)

    counter = 0
    train, test = [], []
    for t in range(spec.num_tasks):
        classes = range(t * spec.classes_per_task, (t + 1) * spec.classes_per_task)
        seg, held = [], []
        for c in classes:
            X = means[c] + spec.stddev * rng.normal((spec.train_per_class + spec.test_per_class, spec.dim))
            for k, x in enumerate(X):
                s = Sample(counter, x, c, t)
                counter += 1
                (seg if k < spec.train_per_class else held).append(s)
        train.append([seg[i] for i in rng.permutation(len(seg))])
        test.append(held)
    return TaskStream(train, test)


class DatasetFormatError(ValueError):
    pass


def load_embedding_dataset(path, rng: RngStream) -> TaskStream:
    """Read a ``task_id,split,label,f0,...`` CSV into a stream.

    Tasks are ordered by ``task_id``; training order within a task is
    shuffled with ``rng``. Stream indices follow file order.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file") from None
        if header[:3] != ["task_id", "split", "label"] or len(header) < 4:
            raise DatasetFormatError(
                f"{path}:1: header must start with task_id,split,label followed by f0..f{{d-1}}"
            )
        feats = header[3:]
        if feats != [f"f{k}" for k in range(len(feats))]:
            raise DatasetFormatError(f"{path}:1: feature columns must be f0..f{len(feats) - 1}")
        d = len(feats)
        rows: dict[int, dict[str, list[Sample]]] = {}
        for idx, row in enumerate(reader):
            line = idx + 2
            if len(row) != d + 3:
                raise DatasetFormatError(f"{path}:{line}: expected {d + 3} fields, got {len(row)}")
            try:
                task, label = int(row[0]), int(row[2])
                x = np.array([float(v) for v in row[3:]])
            except ValueError as e:
                raise DatasetFormatError(f"{path}:{line}: {e}") from None
            if not np.all(np.isfinite(x)):
                raise DatasetFormatError(f"{path}:{line}: non-finite feature")
            if row[1] not in ("train", "test"):
                raise DatasetFormatError(f"{path}:{line}: split must be train or test, got {row[1]!r}")
            if task < 0 or label < 0:
                raise DatasetFormatError(f"{path}:{line}: task_id and label must be non-negative")
            rows.setdefault(task, {"train": [], "test": []})[row[1]].append(Sample(idx, x, label, task))

    train, test = [], []
    for task in sorted(rows):
        seg = rows[task]["train"]
        train.append([seg[i] for i in rng.permutation(len(seg))])
        test.append(rows[task]["test"])
    return TaskStream(train, test)


def write_embedding_dataset(stream: TaskStream, path) -> None:
    """Write a stream in the format read by :func:`load_embedding_dataset`."""
    d = stream.dim
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["task_id", "split", "label"] + [f"f{k}" for k in range(d)])
        for split, segs in (("train", stream.train), ("test", stream.test)):
            for seg in segs:
                for s in seg:
                    w.writerow([s.task_id, split, s.label] + [repr(float(v)) for v in s.features])
