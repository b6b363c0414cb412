"""A small seeded experiment grid, the same thing the command line runs.

Results are written as runs.csv (one line per strategy and seed) and
summary.csv (mean, std and 95% interval per strategy).
"""
import sys
import tempfile
from pathlib import Path

from aser.harness import aggregate_runs, config_from_dict, run_experiment, write_results

cfg = config_from_dict({
    "stream": {"num_tasks": 3, "classes_per_task": 2, "dim": 10, "train_per_class": 300,
               "test_per_class": 50, "mean_radius": 3.0, "stddev": 1.0},
    "train": {"memory_capacity": 60},
    "retrieval": {"candidate_size": 20},
    "seeds": [0, 1, 2],
    "strategies": ["finetune", "er", "aser_mu", "sv_upd", "asv_mu_ret"],
})
records = run_experiment(cfg)
aggregates = aggregate_runs(records)
for a in aggregates:
    print(f"{a.strategy:11s} A_T {100 * a.acc_mean:5.1f} ± {100 * a.acc_ci95:4.1f}   "
          f"F_T {100 * a.forget_mean:5.1f} ± {100 * a.forget_ci95:4.1f}")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
runs, summary = write_results(records, aggregates, out)
print("\n" + runs.read_text().splitlines()[0])
print(f"wrote {runs} and {summary}")
