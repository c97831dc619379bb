from __future__ import annotations

from pathlib import Path

import numpy as np
import orjson
import pytest

from aoplan.bench import harness
from aoplan.bench.csv_io import RAW_HEADER, SUMMARY_HEADER, fmt
from aoplan.bench.harness import (
    BenchConfig,
    BenchRecord,
    TrialJob,
    convergence_experiment,
    emit_csv,
    load_bench_config,
    run_benchmark,
    run_meta,
    run_trials,
    summarize_records,
    weight_sweep,
    worker_count,
    write_report,
)
from aoplan.core.errors import OracleError, ParameterError
from aoplan.core.types import Box, GoalRegion
from aoplan.dynamics.systems import SystemDefinition, time_cost
from aoplan.geometry.obstacles import ObstacleSet
from aoplan.metric.nn_index import MetricWeights
from aoplan.scenarios.builtin import SUBSTITUTION_NOTE
from aoplan.scenarios.model import Scenario, ScenarioDefaults


def _lines(path: Path) -> list[str]:
    return path.read_text().splitlines()


def test_zero_iteration_trial_writes_a_failed_record(tmp_path: Path) -> None:
    cfg = BenchConfig(scenario="geo2d_one_box", planners=["ao-rrt"], trials=1, iterations=0)

    report = run_benchmark(cfg, threads=1)
    raw, summary, meta = write_report(report, tmp_path / "zero.csv")

    assert _lines(raw) == [",".join(RAW_HEADER), "ao_rrt,0,0,0,,1,0"]
    assert _lines(summary) == [",".join(SUMMARY_HEADER), "ao_rrt,0,0,,,0"]
    assert meta.name == "zero_meta.json"
    assert orjson.loads(meta.read_bytes())["failed_trials"] == []


def test_summary_statistics_match_numpy() -> None:
    rng = np.random.default_rng(0)
    costs = rng.uniform(20.0, 30.0, size=47)
    records = [BenchRecord("ao_rrt", i, 1000.0, True, float(c), 10, 0) for i, c in enumerate(costs)]
    records += [BenchRecord("ao_rrt", 47 + i, 1000.0, False, None, 10, 0) for i in range(3)]

    (row,) = summarize_records(records)

    assert row.success_rate == pytest.approx(0.94)
    assert row.n_success == 47
    assert row.mean_cost == pytest.approx(float(np.mean(costs)))
    assert row.std_cost == pytest.approx(float(np.std(costs)))


def test_empty_record_sets_give_header_only_files(tmp_path: Path) -> None:
    raw, summary = emit_csv([], [], tmp_path / "empty.csv")

    assert _lines(raw) == [",".join(RAW_HEADER)]
    assert _lines(summary) == [",".join(SUMMARY_HEADER)]


def test_record_rows_have_one_field_per_column() -> None:
    record = BenchRecord("sst", 3, 0.5, True, 12.3456789, 40, 2)

    assert len(record.row()) == len(RAW_HEADER) == 7
    assert [fmt(value) for value in record.row()] == ["sst", "3", "0.5", "1", "12.3457", "40", "2"]


def test_output_does_not_depend_on_thread_count(tmp_path: Path) -> None:
    cfg = BenchConfig(
        scenario="geo2d_one_box",
        planners=["ao-rrt", "rrt"],
        trials=3,
        iterations=200,
        checkpoints=[50, 200],
    )

    serial = write_report(run_benchmark(cfg, threads=1), tmp_path / "serial.csv")
    pooled = write_report(run_benchmark(cfg, threads=3), tmp_path / "pooled.csv")

    assert serial[0].read_bytes() == pooled[0].read_bytes()
    assert serial[1].read_bytes() == pooled[1].read_bytes()
    assert len(_lines(serial[0])) == 1 + 2 * 3 * 2


def test_failing_trial_is_recorded_and_the_run_continues(monkeypatch: pytest.MonkeyPatch) -> None:
    real_plan = harness.plan

    def flaky_plan(scenario, params, stream, variant):
        if stream.trial == 1:
            raise RuntimeError("integrator exploded")
        return real_plan(scenario, params, stream, variant)

    monkeypatch.setattr(harness, "plan", flaky_plan)
    cfg = BenchConfig(scenario="geo2d_one_box", planners=["ao_rrt"], trials=3, iterations=50)

    report = run_benchmark(cfg, threads=1)

    assert [f.trial for f in report.failures] == [1]
    assert report.meta["failed_trials"] == [
        {"planner": "ao_rrt", "trial": 1, "error": "RuntimeError: integrator exploded"}
    ]
    assert [r.trial for r in report.records] == [0, 1, 2]
    assert report.records[1].success is False


def test_convergence_rates_with_huge_epsilon(geo2d: Scenario) -> None:
    rows = convergence_experiment(geo2d, "ao-rrt", [1e6], [0, 300], trials=2, threads=1)

    assert [(row.k, row.failure_rate) for row in rows][0] == (0, 1.0)
    assert all(row.trials == 2 and row.epsilon == 1e6 for row in rows)


def test_convergence_needs_an_oracle() -> None:
    from aoplan.scenarios.builtin import get_scenario

    with pytest.raises(OracleError):
        convergence_experiment(get_scenario("di2d_two_boxes"), "ao-rrt", [0.1], [10], trials=1)


def test_convergence_rejects_empty_grid(geo2d: Scenario) -> None:
    with pytest.raises(ParameterError):
        convergence_experiment(geo2d, "ao-rrt", [0.1], [], trials=1)


def test_weight_sweep_rows(open_field: Scenario) -> None:
    params = open_field.planner_params(iterations=400)
    weights = [MetricWeights(1.0, 1.0), MetricWeights(1.0, 0.0)]

    rows = weight_sweep(open_field, "ao-rrt", weights, 2, params, threads=1)

    assert [(row.w_x, row.w_c) for row in rows] == [(1.0, 1.0), (1.0, 0.0)]
    for row in rows:
        assert 0.0 <= row.success_rate <= 1.0
        if row.mean_improvement is not None:
            assert row.mean_improvement >= 0.0
            assert row.mean_final_cost <= row.mean_first_cost


def test_bench_config_validation(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        BenchConfig(scenario="geo2d_one_box")
    with pytest.raises(ValueError):
        BenchConfig(scenario="geo2d_one_box", iterations=10, planners=["prm"])
    with pytest.raises(ValueError):
        BenchConfig(scenario="geo2d_one_box", iterations=10, checkpoints=[5, 5])

    path = tmp_path / "bench.json"
    path.write_bytes(orjson.dumps({"scenario": "geo2d_one_box", "iterations": 10, "trials": 0}))
    with pytest.raises(ParameterError, match="trials"):
        load_bench_config(path)


def test_car_runs_carry_the_substitution_note() -> None:
    from aoplan.scenarios.builtin import get_scenario

    scenario = get_scenario("car_parking_lite")
    meta = run_meta(scenario, scenario.planner_params(iterations=1), ["ao_rrt"])

    assert meta["substitution"] == SUBSTITUTION_NOTE
    assert meta["checkpoint_unit"] == "iterations"


def test_worker_count_is_capped_by_cpus_and_jobs(geo2d: Scenario) -> None:
    params = geo2d.planner_params(iterations=10)
    jobs = [TrialJob(geo2d, params, "ao_rrt", 0, trial) for trial in range(3)]

    assert worker_count(jobs, 8, cpu_count=2) == 2
    assert worker_count(jobs, 8, cpu_count=16) == 3
    assert worker_count(jobs, 1, cpu_count=16) == 1
    assert worker_count(jobs[:1], 8, cpu_count=16) == 1


def test_scenarios_that_cannot_be_pickled_run_serially() -> None:
    system = SystemDefinition(
        name="inline",
        state_dim=2,
        control_dim=2,
        f=lambda x, u: np.array(u, dtype=np.float64),
        g=time_cost,
        state_bounds=Box([-5.0, -5.0], [5.0, 5.0]),
        control_bounds=Box([-1.0, -1.0], [1.0, 1.0]),
    )
    scenario = Scenario(
        name="inline_field",
        system=system,
        obstacles=ObstacleSet((), system.state_bounds),
        x_init=[0.0, 0.0],
        goal=GoalRegion([3.0, 0.0], 1.0),
        defaults=ScenarioDefaults(t_prop=1.0, c_max=20.0),
    )
    params = scenario.planner_params(iterations=30, checkpoints=(30.0,))
    jobs = [TrialJob(scenario, params, "ao_rrt", 0, trial) for trial in range(2)]

    assert worker_count(jobs, 4, cpu_count=4) == 1
    outcomes = run_trials(scenario, params, ["ao_rrt"], trials=2, base_seed=0, threads=4)
    assert [o.error for o in outcomes] == [None, None]


@pytest.mark.slow
def test_time_budget_quality_does_not_depend_on_worker_count(geo2d: Scenario) -> None:
    params = geo2d.planner_params(time_budget=1.0, checkpoints=(1.0,))

    serial = run_trials(geo2d, params, ["ao_rrt"], trials=4, base_seed=0, threads=1)
    pooled = run_trials(geo2d, params, ["ao_rrt"], trials=4, base_seed=0, threads=4)

    def mean_nodes(outcomes) -> float:
        return float(np.mean([o.records[-1].nodes for o in outcomes]))

    assert not [o for o in serial + pooled if o.error]
    assert mean_nodes(pooled) >= 0.7 * mean_nodes(serial)
    assert sum(o.final_cost is not None for o in pooled) >= sum(o.final_cost is not None for o in serial) - 1
