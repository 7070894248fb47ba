"""Long training runs checked against target accuracy bands (``pytest -m slow``)."""

import statistics

import pytest

from firefly_bpnn.tools.experiment import build_run_config, run_experiment

pytestmark = pytest.mark.slow

SEEDS = [1, 2, 3, 4, 5]

# fireflies as points in weight space, refined by steepest descent after every move
HYBRID_FIREFLY = {
    "firefly.movement_space": "weight-vector",
    "firefly.refine_steps": 40,
    "firefly.learning_rate": 0.01,
}


def run(data_dir, tmp_path, **values):
    base = {"data_dir": str(data_dir), "out_dir": str(tmp_path), **HYBRID_FIREFLY}
    base.update(values)
    result = run_experiment(build_run_config(base))
    if result.summary.algorithm == "fabpnn":
        best = [r.best_sse for r in result.records]
        assert all(b <= a for a, b in zip(best, best[1:]))
    return result.summary


def test_iris_band(data_dir, tmp_path):
    summaries = [run(data_dir, tmp_path, dataset="iris", pop=20, iters=100, seed=s) for s in SEEDS]
    settled = [
        s for s in summaries
        if s.correct_rate_final >= 90.0 and s.stability_iteration is not None and s.stability_iteration <= 40
    ]
    assert len(settled) >= 3, [(s.correct_rate_final, s.stability_iteration) for s in summaries]


def test_more_fireflies_help(data_dir, tmp_path):
    seeds = range(1, 11)
    big = [run(data_dir, tmp_path, dataset="iris", pop=20, seed=s) for s in seeds]
    small = [run(data_dir, tmp_path, dataset="iris", pop=5, seed=s) for s in seeds]
    assert statistics.median(s.correct_rate_final for s in big) >= statistics.median(s.correct_rate_final for s in small)

    def stable(summaries):
        return statistics.median(s.stability_iteration or s.iterations for s in summaries)

    assert stable(big) <= stable(small)


def test_wine_band(data_dir, tmp_path):
    summaries = [run(data_dir, tmp_path, dataset="wine", pop=20, seed=s) for s in SEEDS]
    assert sum(s.correct_rate_final >= 85.0 for s in summaries) >= 3


def test_liver_band(real_data_dir, tmp_path):
    summaries = [run(real_data_dir, tmp_path, dataset="liver", pop=20, seed=s) for s in SEEDS]
    assert sum(s.correct_rate_final >= 65.0 for s in summaries) >= 3


def test_fireflies_settle_before_ga(data_dir, tmp_path):
    fa = [run(data_dir, tmp_path, dataset="iris", pop=20, seed=s) for s in SEEDS]
    ga = [run(data_dir, tmp_path, algo="gabpnn", dataset="iris", seed=s) for s in SEEDS]
    fa_stable = statistics.median(s.stability_iteration or s.iterations for s in fa)
    ga_reach = statistics.median(s.first_reach_iteration for s in ga)
    assert fa_stable < ga_reach


def test_ga_best_seed(data_dir, tmp_path):
    summaries = [run(data_dir, tmp_path, algo="gabpnn", dataset="iris", iters=100, seed=s) for s in SEEDS]
    assert max(s.correct_rate_final for s in summaries) >= 85.0
    for s in summaries:
        assert s.correct_rate_max >= s.correct_rate_min
