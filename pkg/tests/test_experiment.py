import csv

import pytest

from symtree.experiment import SUMMARY_FIELDS, ExperimentConfig, run_experiment, run_one
from symtree.learner import LearnerConfig
from symtree.runlog import read_log
from symtree.tree import TreeSpec, hypothesis_space_size

from conftest import all_trees


@pytest.mark.parametrize("n,d,size", [(3, 2, 432), (3, 3, 559872), (4, 2, 1024), (4, 3, 4194304)])
def test_hypothesis_space_sizes(n, d, size):
    assert hypothesis_space_size(TreeSpec(n, d)) == size


@pytest.mark.parametrize("n,d", [(3, 2), (2, 2), (4, 1)])
def test_space_size_matches_enumeration(n, d):
    spec = TreeSpec(n, d)
    assert hypothesis_space_size(spec) == len(all_trees(spec))


def test_run_one_row():
    row = run_one(3, 2, 5, LearnerConfig())
    assert set(row) == set(SUMMARY_FIELDS)
    assert row["error"] == "" and row["correct"] is True
    assert row["hypothesis_space"] == 432 and row["max_queries"] == 8
    assert 1 <= row["queries"] <= 8
    assert row["savings"] == round(1 - row["queries"] / 8, 4)


def test_run_one_records_errors(tmp_path):
    # a broken backend surfaces as a recorded error, not an exception
    log = tmp_path / "bad.jsonl"
    row = run_one(3, 2, 0, LearnerConfig(engine="no-such-engine"), str(log))
    assert row["error"] and row["status"] == ""
    assert read_log(log)[-1]["event"] == "error"


def test_run_experiment_outputs(tmp_path):
    cfg = ExperimentConfig(grid=[(3, 2), (2, 1)], seeds=range(3), out_dir=str(tmp_path))
    rows = run_experiment(cfg)
    assert len(rows) == 6
    with open(tmp_path / "summary.csv", newline="") as fh:
        reader = csv.DictReader(fh)
        assert reader.fieldnames == SUMMARY_FIELDS
        table = list(reader)
    assert len(table) == 6 and all(r["correct"] == "True" for r in table)
    runs = sorted(p.name for p in (tmp_path / "runs").iterdir())
    assert runs == [f"n{n}_d{d}_seed{s}.jsonl" for n, d in [(2, 1), (3, 2)] for s in range(3)]
    records = read_log(tmp_path / "runs" / "n3_d2_seed0.jsonl")
    assert records[0]["event"] == "start" and records[-1]["event"] == "end"
    assert "split_exhausted" in records[-1]


def test_parallel_grid_matches_sequential(tmp_path):
    seq = run_experiment(ExperimentConfig(grid=[(3, 2)], seeds=range(2)))
    par = run_experiment(ExperimentConfig(grid=[(3, 2)], seeds=range(2), jobs=2))
    strip = lambda rows: [{k: v for k, v in r.items() if not k.endswith("_time")} for r in rows]
    assert strip(seq) == strip(par)


def test_config_validates_grid():
    with pytest.raises(ValueError):
        ExperimentConfig(grid=[(0, 2)])
