"""Command line entry point: ``aser run | validate | oracle-check``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .harness import (
    STRATEGIES,
    ConfigError,
    aggregate_runs,
    config_to_dict,
    load_config,
    run_experiment,
    write_results,
)
from .knn_shapley import exact_shapley_bruteforce, knn_sv_single

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def parse_seeds(text: str) -> list[int]:
    """``"0..14"`` (inclusive range) or ``"1,3,5"``."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad seed spec {text!r}; use a..b or a,b,c") from None


def oracle_check(instances: int = 200, seed: int = 0, n_max: int = 8) -> float:
    """Max |recursion - brute force| over random small instances."""
    gen = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        n = int(gen.integers(1, n_max + 1))
        d = int(gen.choice([1, 2, 5]))
        K = int(gen.integers(1, 4))
        X, y = gen.normal(size=(n, d)), gen.integers(0, 3, n)
        x_ev, y_ev = gen.normal(size=d), int(gen.integers(0, 3))
        diff = knn_sv_single(X, y, x_ev, y_ev, K) - exact_shapley_bruteforce(X, y, x_ev, y_ev, K)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "strategies", None):
        cfg.strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    if getattr(args, "seeds", None):
        cfg.seeds = parse_seeds(args.seeds)
    if getattr(args, "memory", None) is not None:
        cfg.train.memory_capacity = args.memory
        if args.memory < 0:
            raise ConfigError("--memory must be non-negative")
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "dump_embeddings", False):
        cfg.dump_embeddings = True
    cfg.validate()
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    t0 = time.perf_counter()
    records = run_experiment(cfg, workers=args.workers)
    aggregates = aggregate_runs(records)
    runs, summary = write_results(records, aggregates, cfg.output_dir, cfg.record_wall_time)
    (Path(cfg.output_dir) / "timing.json").write_text(
        json.dumps({"total_seconds": time.perf_counter() - t0,
                    "runs": [[r.strategy, r.seed, r.wall_seconds] for r in records]}, indent=1)
    )
    for a in aggregates:
        print(f"{a.strategy:12s} A_T={100 * a.acc_mean:5.1f}±{100 * a.acc_ci95:.1f}  "
              f"F_T={100 * a.forget_mean:5.1f}±{100 * a.forget_ci95:.1f}  (n={a.n_runs})")
    print(f"wrote {runs} and {summary}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(json.dumps(config_to_dict(cfg), indent=2))
    print(f"config OK: {len(cfg.strategies)} strategies x {len(cfg.seeds)} seeds")
    return EXIT_OK


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    worst = oracle_check(args.instances, args.seed)
    ok = worst <= args.tol
    print(f"max |recursion - brute force| = {worst:.3e} over {args.instances} instances "
          f"({time.perf_counter() - t0:.2f}s) -> {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aser", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment grid")
    run.add_argument("--config", required=True)
    run.add_argument("--strategies", help=f"comma list from {','.join(STRATEGIES)}")
    run.add_argument("--seeds", help="a..b or a,b,c")
    run.add_argument("--memory", type=int, help="memory capacity M")
    run.add_argument("--out", help="output directory")
    run.add_argument("--dump-embeddings", action="store_true")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)

    orc = sub.add_parser("oracle-check", help="compare KNN Shapley recursion with brute force")
    orc.add_argument("--instances", type=int, default=200)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--tol", type=float, default=1e-10)
    orc.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001 - map everything else to the runtime exit code
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
