import json
from dataclasses import fields
from typing import Optional

import pandas as pd
import pytest

from firefly_bpnn.CONFIG import METRICS_COLUMNS
from firefly_bpnn.errors import ConfigError, DatasetError
from firefly_bpnn.tools.common import TrainingRecord
from firefly_bpnn.tools.dataset_loader import DatasetSchema
from firefly_bpnn.tools.experiment import (
    RunConfig,
    build_run_config,
    cmd_compare,
    cmd_train,
    first_reach_iteration,
    load_run_config,
    make_compare_configs,
    read_metrics,
    run_experiment,
    stability_iteration,
    write_metrics,
)
from firefly_bpnn.tools.firefly import FireflyConfig
from firefly_bpnn.tools.genetic import GaConfig
from firefly_bpnn.tools.network import SdbpConfig


def run_values(data_dir, out_dir, **overrides):
    values = {"dataset": "iris", "data_dir": str(data_dir), "out_dir": str(out_dir), "seed": 1}
    values.update(overrides)
    return values


class TestStability:
    def test_constant(self):
        assert stability_iteration([80.0] * 7) == 1

    def test_settles(self):
        assert stability_iteration([50, 90, 97, 97, 97]) == 3

    def test_jump_at_end(self):
        assert stability_iteration([10, 20, 30, 40, 90]) == 5

    def test_within_band(self):
        assert stability_iteration([60, 96.6, 97.0, 96.7, 97.0]) == 2

    def test_single_point(self):
        assert stability_iteration([97.0]) is None

    def test_empty(self):
        with pytest.raises(ValueError):
            stability_iteration([])

    def test_first_reach(self):
        assert first_reach_iteration([10, 50, 40, 50]) == 2
        assert first_reach_iteration([70, 60]) == 1


class TestBuildRunConfig:
    def test_defaults(self):
        cfg = build_run_config({})
        assert cfg.algorithm == "fabpnn"
        assert cfg.firefly == FireflyConfig()
        assert cfg.ga is None and cfg.sdbp is None
        assert cfg.schema == DatasetSchema.builtin("iris")

    def test_pop_and_iters_follow_algorithm(self):
        fa = build_run_config({"pop": 5, "iters": 7})
        assert (fa.firefly.population_size, fa.firefly.max_iterations) == (5, 7)
        ga = build_run_config({"algo": "gabpnn", "pop": 30, "iters": 9})
        assert (ga.ga.population_size, ga.ga.max_generations) == (30, 9)
        sd = build_run_config({"algo": "sdbp", "pop": 30, "iters": 9})
        assert sd.sdbp.max_iterations == 9

    def test_sections(self):
        cfg = build_run_config({
            "firefly.alpha": 0.1,
            "firefly.movement_space": "weight-vector",
            "network.hidden_size": 4,
            "topology": "4,5,3",
        })
        assert cfg.firefly.alpha == 0.1
        assert cfg.firefly.movement_space == "weight-vector"
        assert cfg.hidden_size == 4
        assert cfg.topology == (4, 5, 3)

    def test_algorithm_argument_wins(self):
        assert build_run_config({"algo": "sdbp"}, algorithm="gabpnn").algorithm == "gabpnn"

    def test_inline_schema(self):
        cfg = build_run_config({"dataset": "custom", "data_file": "x.csv", "schema": "label_column=0,label_kind=integer-class"})
        assert cfg.schema.label_column == 0
        assert cfg.schema.label_kind == "integer-class"

    @pytest.mark.parametrize(
        "values",
        [
            {"colour": "red"},
            {"swarm.size": 3},
            {"algo": "pso"},
            {"firefly.gamma": 1.0},
            {"ga.population_size": "many"},
            {"firefly.alpha": -1.0},
            {"holdout": 1.0},
            {"dataset": "mushroom"},
            {"schema": "nosuch"},
            {"a.b.c": 1},
        ],
    )
    def test_rejected(self, values):
        with pytest.raises(ConfigError):
            build_run_config(values)

    def test_trainer_block_types(self):
        types = {f.name: f.type for f in fields(RunConfig)}
        assert types["firefly"] == Optional[FireflyConfig]
        assert types["ga"] == Optional[GaConfig]
        assert types["sdbp"] == Optional[SdbpConfig]

    def test_missing_block(self):
        assert RunConfig(algorithm="gabpnn").validate()

    def test_file_then_overrides(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("algo = gabpnn\nseed = 4\nga.population_size = 12  # small\n")
        cfg = load_run_config(config, {"seed": 9, "pop": None})
        assert cfg.algorithm == "gabpnn"
        assert cfg.seed == 9
        assert cfg.ga.population_size == 12


class TestRunExperiment:
    def test_topology_must_fit(self, data_dir, tmp_path):
        cfg = build_run_config(run_values(data_dir, tmp_path, topology="5,6,3", iters=1))
        with pytest.raises(ConfigError):
            run_experiment(cfg)

    def test_missing_data(self, tmp_path):
        cfg = build_run_config(run_values(tmp_path / "nowhere", tmp_path, iters=1))
        with pytest.raises(DatasetError):
            run_experiment(cfg)

    def test_holdout(self, data_dir, tmp_path):
        cfg = build_run_config(run_values(data_dir, tmp_path, holdout=0.2, iters=2, pop=4))
        result = run_experiment(cfg)
        assert result.summary.holdout_correct_rate is not None
        assert 0.0 <= result.summary.holdout_correct_rate <= 100.0

    def test_summary_fields(self, data_dir, tmp_path):
        result = run_experiment(build_run_config(run_values(data_dir, tmp_path, iters=5, pop=6)))
        s = result.summary
        assert s.iterations == len(result.records)
        assert s.correct_rate_max >= s.correct_rate_final >= s.correct_rate_min >= 0.0
        assert s.stability_iteration is None or s.stability_iteration <= s.iterations
        assert s.topology == "4-6-3"
        assert "fabpnn on iris" in s.summary_line()


class TestCmdTrain:
    def test_outputs(self, data_dir, tmp_path):
        cfg = build_run_config(run_values(data_dir, tmp_path, pop=20, iters=8))
        summary = cmd_train(cfg)
        lines = (tmp_path / "metrics.csv").read_text().splitlines()
        assert lines[0] == "iteration,avg_sse,best_sse,correct_rate,eta"
        assert len(lines) - 1 == summary.iterations <= 8
        stored = json.loads((tmp_path / "summary.json").read_text())
        assert stored["algorithm"] == "fabpnn"
        assert stored["seed"] == 1
        assert stored["iterations"] == summary.iterations
        frame = read_metrics(tmp_path / "metrics.csv")
        assert stability_iteration(frame["correct_rate"].tolist()) == stored["stability_iteration"]

    def test_single_iteration(self, data_dir, tmp_path):
        cmd_train(build_run_config(run_values(data_dir, tmp_path, iters=1)))
        assert len(read_metrics(tmp_path / "metrics.csv")) == 1

    def test_byte_identical(self, data_dir, tmp_path):
        for run in ("a", "b"):
            cmd_train(build_run_config(run_values(data_dir, tmp_path / run, pop=6, iters=6)))
        assert (tmp_path / "a" / "metrics.csv").read_bytes() == (tmp_path / "b" / "metrics.csv").read_bytes()

    @pytest.mark.parametrize("algo", ["gabpnn", "sdbp"])
    def test_eta_blank_for_baselines(self, data_dir, tmp_path, algo):
        cmd_train(build_run_config(run_values(data_dir, tmp_path, algo=algo, pop=6, iters=3)))
        rows = (tmp_path / "metrics.csv").read_text().splitlines()[1:]
        assert rows and all(row.endswith(",") for row in rows)

    def test_wine(self, data_dir, tmp_path):
        summary = cmd_train(build_run_config(run_values(data_dir, tmp_path, dataset="wine", pop=4, iters=2)))
        assert summary.topology == "13-6-3"


class TestMetricsFiles:
    def test_round_trip_columns(self, tmp_path):
        records = [TrainingRecord(1, 2.5, 1.25, 33.3333333333, 1.0), TrainingRecord(2, 2.0, 1.0, 50.0, 1.05)]
        path = write_metrics(records, tmp_path / "m.csv")
        assert path.read_text().splitlines()[1] == "1,2.5,1.25,33.33333333,1"
        frame = read_metrics(path)
        assert list(frame.columns) == METRICS_COLUMNS

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("iter,sse\n1,2\n")
        with pytest.raises(DatasetError):
            read_metrics(path)

    def test_missing(self, tmp_path):
        with pytest.raises(DatasetError):
            read_metrics(tmp_path / "none.csv")


class TestCompare:
    def test_population_sweep(self, data_dir, tmp_path):
        base = run_values(data_dir, tmp_path, iters=3)
        configs = make_compare_configs(base, ["fabpnn"], [1, 2], [5, 20])
        assert [c.run_label for c in configs] == ["fabpnn-pop5"] * 2 + ["fabpnn-pop20"] * 2
        table = cmd_compare(configs, tmp_path, max_workers=2)
        assert table["label"].tolist() == ["fabpnn-pop5", "fabpnn-pop20"]
        assert table["runs"].tolist() == [2, 2]
        assert not table.drop(columns=["median_stability_iteration"]).isna().any().any()
        for name in ("comparison.csv", "comparison.txt", "runs.csv"):
            assert (tmp_path / name).exists()
        assert (tmp_path / "fabpnn-pop20" / "seed-2" / "metrics.csv").exists()

    def test_single_run_degenerates(self, data_dir, tmp_path):
        configs = make_compare_configs(run_values(data_dir, tmp_path, iters=2), ["gabpnn"], [3])
        table = cmd_compare(configs, tmp_path)
        summary = json.loads((tmp_path / "gabpnn" / "seed-3" / "summary.json").read_text())
        row = table.iloc[0]
        assert row["runs"] == 1
        assert row["median_correct_rate"] == pytest.approx(summary["correct_rate_final"])
        assert row["max_correct_rate"] == row["min_correct_rate"] == row["median_correct_rate"]
        assert row["median_avg_sse"] == pytest.approx(summary["final_avg_sse"])

    def test_algorithms_side_by_side(self, data_dir, tmp_path):
        configs = make_compare_configs(run_values(data_dir, tmp_path, dataset="wine", iters=2, pop=4), ["fabpnn", "gabpnn"], [1])
        table = cmd_compare(configs, tmp_path)
        assert table["label"].tolist() == ["fabpnn", "gabpnn"]
        assert "Training performance on wine" in (tmp_path / "comparison.txt").read_text()

    def test_rejects_empty(self, tmp_path):
        with pytest.raises(ConfigError):
            make_compare_configs({}, [], [1])
        with pytest.raises(ConfigError):
            cmd_compare([], tmp_path)

    def test_failed_run_aborts(self, tmp_path):
        configs = make_compare_configs(run_values(tmp_path / "nowhere", tmp_path, iters=1), ["sdbp"], [1])
        with pytest.raises(DatasetError):
            cmd_compare(configs, tmp_path)
        assert not (tmp_path / "comparison.csv").exists()

    def test_pd_frame_returned(self, data_dir, tmp_path):
        table = cmd_compare(make_compare_configs(run_values(data_dir, tmp_path, iters=1), ["sdbp"], [1, 2]), tmp_path)
        assert isinstance(table, pd.DataFrame)
        assert pd.read_csv(tmp_path / "runs.csv")["seed"].tolist() == [1, 2]


class TestSchemaOverrides:
    def test_inline_overrides_keep_builtin_fields(self):
        cfg = build_run_config({"dataset": "wine", "schema": "expected_rows=none"})
        assert cfg.schema.label_column == 0
        assert cfg.schema.expected_rows is None

    def test_section_overrides(self):
        cfg = build_run_config({"dataset": "iris", "schema.expected_classes": 3, "schema.delimiter": ","})
        assert cfg.schema == DatasetSchema.builtin("iris")
