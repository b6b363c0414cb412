import json

import pytest

from aser.cli import main, parse_seeds
from aser.harness import (
    ConfigError,
    RunRecord,
    aggregate_runs,
    config_from_dict,
    config_to_dict,
    load_config,
    mean_std_ci,
    run_experiment,
    write_results,
)

TINY = {
    "stream": {"num_tasks": 2, "classes_per_task": 2, "dim": 4, "train_per_class": 30,
               "test_per_class": 10, "mean_radius": 3.0, "stddev": 1.0},
    "train": {"hidden_dim": 8, "memory_capacity": 12},
    "retrieval": {"candidate_size": 6, "knn_k": 2},
    "seeds": [0, 1, 2],
    "strategies": ["finetune", "aser_mu"],
}


def record(strategy="er", seed=0, acc=0.5, forget=0.1):
    return RunRecord(strategy, seed, 10, acc, forget, [acc, acc], 1.0)


def test_mean_std_ci():
    m, s, ci = mean_std_ci([0.4, 0.6])
    assert m == pytest.approx(0.5) and s == pytest.approx(0.1414, abs=1e-4)
    assert ci == pytest.approx(1.96 * s / 2 ** 0.5)
    assert mean_std_ci([0.7]) == (0.7, 0.0, 0.0)
    assert mean_std_ci([0.3] * 4)[1] == 0.0
    with pytest.raises(ValueError):
        mean_std_ci([])


def test_aggregate_groups_in_order():
    aggs = aggregate_runs([record("b", 0, 0.4), record("a", 0), record("b", 1, 0.6)])
    assert [a.strategy for a in aggs] == ["b", "a"]
    assert aggs[0].n_runs == 2 and aggs[0].acc_mean == pytest.approx(0.5)


def test_run_experiment_records():
    cfg = config_from_dict(TINY)
    recs = run_experiment(cfg)
    assert [(r.strategy, r.seed) for r in recs] == [(s, k) for s in ("finetune", "aser_mu") for k in (0, 1, 2)]
    assert all(r.memory_size == 0 for r in recs if r.strategy == "finetune")
    assert all(r.memory_size == 12 for r in recs if r.strategy == "aser_mu")
    assert all(len(r.final_accuracies) == 2 for r in recs)


def test_seed_order_does_not_change_records():
    fwd = run_experiment(config_from_dict({**TINY, "strategies": ["er"]}))
    rev = run_experiment(config_from_dict({**TINY, "strategies": ["er"], "seeds": [2, 1, 0]}))
    key = lambda r: (r.seed, r.avg_accuracy, r.avg_forgetting, r.final_accuracies)  # noqa: E731
    assert sorted(map(key, fwd)) == sorted(map(key, rev))


def test_write_results(tmp_path):
    recs = [record(seed=k) for k in range(6)]
    runs, summary = write_results(recs, aggregate_runs(recs), tmp_path)
    lines = runs.read_text().splitlines()
    assert lines[0] == "strategy,seed,M,avg_accuracy,avg_forgetting,acc_task_1,acc_task_2,wall_seconds"
    assert len(lines) == 7 and lines[1].endswith(",")
    first = (runs.read_bytes(), summary.read_bytes())
    write_results(recs, aggregate_runs(recs), tmp_path)
    assert (runs.read_bytes(), summary.read_bytes()) == first
    write_results(recs, aggregate_runs(recs), tmp_path / "t", record_wall_time=True)
    assert (tmp_path / "t" / "runs.csv").read_text().splitlines()[1].endswith(",1.0")


def test_write_empty(tmp_path):
    runs, summary = write_results([], [], tmp_path)
    assert len(runs.read_text().splitlines()) == 1
    assert len(summary.read_text().splitlines()) == 1


@pytest.mark.parametrize("patch,msg", [
    ({"seeds": []}, "seed"),
    ({"strategies": ["mir"]}, "unknown strategies"),
    ({"train": {"learning_rate": -1}}, "learning_rate"),
    ({"train": {"retrieval_strategy": "ASER"}}, "strategy list"),
    ({"stream": {"num_tasks": 0}}, "num_tasks"),
    ({"retrieval": {"knn_k": 0}}, "knn_k"),
    ({"bogus": 1}, "unknown top-level"),
    ({"dataset": "/nonexistent.csv", "stream": None}, "not found"),
])
def test_config_errors(patch, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_dict({**TINY, **patch})


def test_config_round_trip():
    cfg = config_from_dict(TINY)
    again = config_from_dict(config_to_dict(cfg))
    assert config_to_dict(again) == config_to_dict(cfg)


def test_parse_seeds():
    assert parse_seeds("0..3") == [0, 1, 2, 3]
    assert parse_seeds("4,2") == [4, 2]
    with pytest.raises(ConfigError):
        parse_seeds("3..1")


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({**TINY, "output_dir": str(tmp_path / "out")}))
    return p


def test_cli_run(cfg_file, tmp_path, capsys):
    out = tmp_path / "o2"
    code = main(["run", "--config", str(cfg_file), "--strategies", "er,finetune",
                 "--seeds", "0..1", "--memory", "8", "--out", str(out), "--dump-embeddings"])
    assert code == 0
    lines = (out / "runs.csv").read_text().splitlines()
    assert [l.split(",")[:3] for l in lines[1:]] == [
        ["er", "0", "8"], ["er", "1", "8"], ["finetune", "0", "0"], ["finetune", "1", "0"]]
    assert (out / "summary.csv").exists() and (out / "timing.json").exists()
    assert (out / "embeddings" / "er_seed0_task2.csv").exists()


def test_cli_validate_and_exit_codes(cfg_file, tmp_path, capsys):
    assert main(["validate", "--config", str(cfg_file)]) == 0
    assert "config OK" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad)]) == 1
    assert main(["run", "--config", str(cfg_file), "--strategies", "nope"]) == 1
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 1


def test_cli_oracle_check(capsys):
    assert main(["oracle-check", "--instances", "20"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_dataset_config(tmp_path):
    from aser.numeric import RngStream
    from aser.stream import TaskStreamSpec, generate_synthetic_stream, write_embedding_dataset

    path = tmp_path / "data.csv"
    write_embedding_dataset(generate_synthetic_stream(TaskStreamSpec(**TINY["stream"]), RngStream(0)), path)
    cfg = config_from_dict({**TINY, "stream": None, "dataset": str(path), "strategies": ["er"], "seeds": [0]})
    (rec,) = run_experiment(cfg)
    assert 0.0 <= rec.avg_accuracy <= 1.0
