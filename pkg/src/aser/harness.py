"""Multi-seed experiment driver, aggregation and CSV output."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .learner import (
    ClassifierParams,
    RetrievalStrategy,
    TrainConfig,
    UpdateStrategy,
    train_continual,
)
from .memory import RetrievalConfig
from .metrics import average_accuracy, average_forgetting
from .numeric import RngStream
from .stream import TaskStream, TaskStreamSpec, generate_synthetic_stream, load_embedding_dataset


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Strategy:
    update: UpdateStrategy
    retrieval: RetrievalStrategy
    uses_memory: bool = True
    iid: bool = False


R, S = UpdateStrategy.RESERVOIR, UpdateStrategy.SV
STRATEGIES: dict[str, Strategy] = {
    "finetune": Strategy(R, RetrievalStrategy.NONE, uses_memory=False),
    "iid_online": Strategy(R, RetrievalStrategy.NONE, uses_memory=False, iid=True),
    "er": Strategy(R, RetrievalStrategy.RANDOM),
    "aser": Strategy(S, RetrievalStrategy.ASER),
    "aser_mu": Strategy(S, RetrievalStrategy.ASER_MU),
    "dist": Strategy(S, RetrievalStrategy.DIST),
    "dist_mu": Strategy(S, RetrievalStrategy.DIST_MU),
    "sv_upd": Strategy(S, RetrievalStrategy.RANDOM),
    "asv_ret": Strategy(R, RetrievalStrategy.ASER),
    "asv_mu_ret": Strategy(R, RetrievalStrategy.ASER_MU),
}


@dataclass
class ExperimentConfig:
    stream: TaskStreamSpec | None = field(default_factory=TaskStreamSpec)
    dataset: str | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    seeds: list[int] = field(default_factory=lambda: list(range(15)))
    strategies: list[str] = field(
        default_factory=lambda: ["finetune", "er", "aser", "aser_mu", "dist", "dist_mu"]
    )
    output_dir: str = "results"
    dump_embeddings: bool = False
    record_wall_time: bool = False

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("duplicate seeds")
        if not self.strategies:
            raise ConfigError("at least one strategy is required")
        bad = [s for s in self.strategies if s not in STRATEGIES]
        if bad:
            raise ConfigError(f"unknown strategies {bad}; choose from {sorted(STRATEGIES)}")
        if (self.stream is None) == (self.dataset is None):
            raise ConfigError("exactly one of 'stream' and 'dataset' must be given")
        if self.stream is not None:
            try:
                self.stream.validate()
            except ValueError as e:
                raise ConfigError(f"stream: {e}") from None
        elif not Path(self.dataset).is_file():
            raise ConfigError(f"dataset not found: {self.dataset}")


def _build(cls, data: dict, section: str):
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"{section}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{section}: {e}") from None


def config_from_dict(doc: dict) -> ExperimentConfig:
    """Build a config from the JSON document layout (see README)."""
    doc = dict(doc)
    top = {"stream", "dataset", "train", "retrieval", "seeds", "strategies",
           "output_dir", "dump_embeddings", "record_wall_time"}
    unknown = set(doc) - top
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    retrieval = _build(RetrievalConfig, doc.pop("retrieval", {}) or {}, "retrieval")
    train_doc = dict(doc.pop("train", {}) or {})
    for k in ("update_strategy", "retrieval_strategy", "retrieval"):
        if k in train_doc:
            raise ConfigError(f"train: '{k}' is set by the strategy list, not the config")
    train = _build(TrainConfig, {**train_doc, "retrieval": retrieval}, "train")
    dataset = doc.pop("dataset", None)
    stream_doc = doc.pop("stream", None)
    if stream_doc is None and dataset is None:
        stream_doc = {}
    stream = None if stream_doc is None else _build(TaskStreamSpec, stream_doc, "stream")
    cfg = ExperimentConfig(stream=stream, dataset=dataset, train=train)
    for key in ("seeds", "strategies", "output_dir", "dump_embeddings", "record_wall_time"):
        if key in doc:
            setattr(cfg, key, doc[key])
    cfg.seeds = [int(s) for s in cfg.seeds]
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(doc)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    train = asdict(cfg.train)
    retrieval = train.pop("retrieval")
    for k in ("update_strategy", "retrieval_strategy"):
        train.pop(k)
    retrieval["score_variant"] = cfg.train.retrieval.score_variant.value
    return {
        "stream": None if cfg.stream is None else asdict(cfg.stream),
        "dataset": cfg.dataset,
        "train": train,
        "retrieval": retrieval,
        "seeds": list(cfg.seeds),
        "strategies": list(cfg.strategies),
        "output_dir": cfg.output_dir,
        "dump_embeddings": cfg.dump_embeddings,
        "record_wall_time": cfg.record_wall_time,
    }


@dataclass
class RunRecord:
    strategy: str
    seed: int
    memory_size: int
    avg_accuracy: float
    avg_forgetting: float
    final_accuracies: list[float]
    wall_seconds: float


def _make_stream(cfg: ExperimentConfig, rng: RngStream) -> TaskStream:
    if cfg.dataset is not None:
        return load_embedding_dataset(cfg.dataset, rng)
    return generate_synthetic_stream(cfg.stream, rng)


def run_single(cfg: ExperimentConfig, strategy: str, seed: int) -> RunRecord:
    """One (strategy, seed) run with fresh stream, parameters and memory."""
    t0 = time.perf_counter()
    spec = STRATEGIES[strategy]
    rng = RngStream(seed)
    stream = _make_stream(cfg, rng.child("stream"))
    if spec.iid:
        stream = stream.iid_shuffled(rng.child("iid"))
    memory = cfg.train.memory_capacity if spec.uses_memory else 0
    tcfg = TrainConfig(
        **{**cfg.train.__dict__,
           "update_strategy": spec.update,
           "retrieval_strategy": spec.retrieval,
           "memory_capacity": memory}
    )
    params = ClassifierParams.init(stream.dim, tcfg.hidden_dim, stream.num_classes, rng.child("init"))
    dump_dir = None
    if cfg.dump_embeddings:
        dump_dir = Path(cfg.output_dir) / "embeddings"
        dump_dir.mkdir(parents=True, exist_ok=True)
    res = train_continual(stream, tcfg, params, rng.child("train"),
                          dump_dir=dump_dir, dump_prefix=f"{strategy}_seed{seed}_")
    T = len(res.accuracy)
    forgetting = average_forgetting(res.accuracy) if T >= 2 else math.nan
    return RunRecord(
        strategy=strategy,
        seed=seed,
        memory_size=memory,
        avg_accuracy=average_accuracy(res.accuracy),
        avg_forgetting=forgetting,
        final_accuracies=list(res.accuracy.rows[-1]),
        wall_seconds=time.perf_counter() - t0,
    )


def _run_pair(args):
    return run_single(*args)


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    """All (strategy, seed) runs, ordered by strategy list then seed list."""
    cfg.validate()
    jobs = [(cfg, s, seed) for s in cfg.strategies for seed in cfg.seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_run_pair, jobs))
    return [run_single(*job) for job in jobs]


@dataclass
class Aggregate:
    strategy: str
    n_runs: int
    memory_size: int
    acc_mean: float
    acc_std: float
    acc_ci95: float
    forget_mean: float
    forget_std: float
    forget_ci95: float


def mean_std_ci(values) -> tuple[float, float, float]:
    """Mean, sample std (0 for a single value) and normal 95% CI half-width."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot aggregate an empty group")
    mean = float(v.mean())
    std = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return mean, std, 1.96 * std / math.sqrt(v.size)


def aggregate_runs(records: list[RunRecord]) -> list[Aggregate]:
    """Per-strategy summaries, in order of first appearance."""
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.strategy, []).append(r)
    out = []
    for name, recs in groups.items():
        a = mean_std_ci([r.avg_accuracy for r in recs])
        f = mean_std_ci([r.avg_forgetting for r in recs])
        out.append(Aggregate(name, len(recs), recs[0].memory_size, *a, *f))
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


RUN_COLUMNS = ["strategy", "seed", "M", "avg_accuracy", "avg_forgetting"]
SUMMARY_COLUMNS = [
    "strategy", "n_runs", "M",
    "avg_accuracy_mean", "avg_accuracy_std", "avg_accuracy_ci95",
    "avg_forgetting_mean", "avg_forgetting_std", "avg_forgetting_ci95",
]


def write_results(records: list[RunRecord], aggregates: list[Aggregate], out_dir,
                  record_wall_time: bool = False) -> tuple[Path, Path]:
    """Write ``runs.csv`` and ``summary.csv``.

    ``wall_seconds`` is left blank unless ``record_wall_time`` is set so that
    reruns of a config produce identical bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        T = max((len(r.final_accuracies) for r in records), default=0)
        runs_path, summary_path = out / "runs.csv", out / "summary.csv"
        with runs_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RUN_COLUMNS + [f"acc_task_{j}" for j in range(1, T + 1)] + ["wall_seconds"])
            for r in records:
                wall = _fmt(r.wall_seconds) if record_wall_time else ""
                w.writerow([r.strategy, r.seed, r.memory_size, _fmt(r.avg_accuracy),
                            _fmt(r.avg_forgetting), *map(_fmt, r.final_accuracies), wall])
        with summary_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for a in aggregates:
                w.writerow([a.strategy, a.n_runs, a.memory_size,
                            *map(_fmt, (a.acc_mean, a.acc_std, a.acc_ci95,
                                        a.forget_mean, a.forget_std, a.forget_ci95))])
    except OSError as e:
        raise OSError(f"failed writing results to {out}: {e}") from e
    return runs_path, summary_path
