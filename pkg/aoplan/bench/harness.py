"""Multi-trial benchmark harness, convergence experiment and weight sweep.

Trial ``i`` of every planner uses ``RandomStream(base_seed + i, trial=i)``.
Trials run in worker processes, never on threads sharing one interpreter,
so a wallclock budget buys every trial a full CPU.  Each trial owns its
tree, index and stream, and results are re-sorted before emission, so in
iteration mode the output bytes do not depend on the number of workers.
Every finished trial is verified (bookkeeping recomputation, schedule
replay, oracle lower bound).  A trial that raises is logged and recorded
as a failure; the run continues.
"""

from __future__ import annotations

import importlib.metadata
import logging
import multiprocessing
import os
import pickle
import platform
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from aoplan.bench.csv_io import (
    CONVERGENCE_HEADER,
    LOG_HEADER,
    RAW_HEADER,
    SUMMARY_HEADER,
    SWEEP_HEADER,
    meta_path,
    summary_path,
    write_json,
    write_rows,
)
from aoplan.config import get_settings
from aoplan.core.errors import OracleError, ParameterError, ScenarioParseError, TrajectoryValidationError
from aoplan.core.random_stream import RandomStream
from aoplan.metric.nn_index import MetricWeights
from aoplan.planners.params import LogEntry, PlannerParams, PlanResult, normalize_variant
from aoplan.planners.run import plan, verify_result
from aoplan.scenarios.builtin import SUBSTITUTION_NOTE, builtin_scenarios
from aoplan.scenarios.io import parse_scenario
from aoplan.scenarios.model import Scenario
from aoplan.scenarios.oracles import scenario_oracle

logger = logging.getLogger(__name__)

# Slack allowed below the oracle lower bound.
LOWER_BOUND_SLACK = 1e-6


class BenchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str
    planners: list[str] = Field(default_factory=lambda: ["ao_rrt", "rrt"])
    trials: int = Field(default=50, ge=1)
    iterations: int | None = Field(default=None, ge=0)
    time_budget: float | None = Field(default=None, ge=0.0)
    checkpoints: list[float] = Field(default_factory=list)
    base_seed: int = Field(default=0, ge=0)
    output: Path | None = None
    threads: int | None = Field(default=None, ge=1)
    c_max: float | None = Field(default=None, gt=0.0)
    t_prop: float | None = Field(default=None, gt=0.0)
    w_x: float | None = Field(default=None, ge=0.0)
    w_c: float | None = Field(default=None, ge=0.0)
    goal_bias: float | None = Field(default=None, ge=0.0, lt=1.0)
    resolution: float | None = Field(default=None, gt=0.0)

    @field_validator("planners")
    @classmethod
    def _known_planners(cls, planners: list[str]) -> list[str]:
        if not planners:
            raise ValueError("at least one planner is required")
        return [normalize_variant(name) for name in planners]

    @field_validator("checkpoints")
    @classmethod
    def _increasing(cls, checkpoints: list[float]) -> list[float]:
        if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        return checkpoints

    @model_validator(mode="after")
    def _stop_condition(self) -> "BenchConfig":
        if self.iterations is None and self.time_budget is None:
            raise ValueError("set iterations and/or time_budget")
        return self

    @property
    def sample_points(self) -> tuple[float, ...]:
        if self.checkpoints:
            return tuple(self.checkpoints)
        return (float(self.iterations),) if self.iterations is not None else (float(self.time_budget),)


def load_bench_config(path: str | Path) -> BenchConfig:
    path = Path(path)
    try:
        raw = orjson.loads(path.read_bytes())
    except OSError as exc:
        raise ScenarioParseError(f"{path}: {exc.strerror or exc}") from exc
    except orjson.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        return BenchConfig.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        raise ParameterError(f"{path}: {location}: {error['msg']}") from exc


def resolve_scenario(ref: str) -> Scenario:
    """Built-in scenario name or path to a scenario file."""

    scenarios = builtin_scenarios()
    if ref in scenarios:
        return scenarios[ref]
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        return parse_scenario(path)
    raise ScenarioParseError(f"{ref!r} is neither a built-in scenario ({sorted(scenarios)}) nor a file")


def bench_params(scenario: Scenario, cfg: BenchConfig) -> PlannerParams:
    weights = None
    if cfg.w_x is not None or cfg.w_c is not None:
        defaults = scenario.weights
        weights = MetricWeights(
            cfg.w_x if cfg.w_x is not None else defaults.w_x,
            cfg.w_c if cfg.w_c is not None else defaults.w_c,
        )
    return scenario.planner_params(
        iterations=cfg.iterations,
        time_budget=cfg.time_budget,
        checkpoints=cfg.sample_points,
        c_max=cfg.c_max,
        t_prop=cfg.t_prop,
        weights=weights,
        goal_bias=cfg.goal_bias,
        collision_resolution=cfg.resolution,
    )


@dataclass(frozen=True, slots=True)
class BenchRecord:
    planner: str
    trial: int
    checkpoint: float
    success: bool
    best_cost: float | None
    nodes: int
    pruned: int

    def row(self) -> tuple[Any, ...]:
        return (self.planner, self.trial, self.checkpoint, self.success, self.best_cost, self.nodes, self.pruned)


@dataclass(frozen=True, slots=True)
class SummaryRow:
    planner: str
    checkpoint: float
    success_rate: float
    mean_cost: float | None
    std_cost: float | None
    n_success: int

    def row(self) -> tuple[Any, ...]:
        return (self.planner, self.checkpoint, self.success_rate, self.mean_cost, self.std_cost, self.n_success)


@dataclass(slots=True)
class TrialOutcome:
    planner: str
    trial: int
    records: list[BenchRecord]
    first_cost: float | None = None
    final_cost: float | None = None
    error: str | None = None


@dataclass(slots=True)
class BenchReport:
    records: list[BenchRecord]
    summary: list[SummaryRow]
    failures: list[TrialOutcome] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)


def check_lower_bound(scenario: Scenario, result: PlanResult, lower_bound: float | None) -> None:
    cost = result.best_cost
    if lower_bound is not None and cost is not None and cost < lower_bound - LOWER_BOUND_SLACK:
        raise TrajectoryValidationError(
            f"{scenario.name}: reported cost {cost:.9g} is below the oracle bound {lower_bound:.9g}"
        )


def _oracle_lower_bound(scenario: Scenario) -> float | None:
    if scenario.oracle is None:
        return None
    return scenario_oracle(scenario).lower_bound


def run_trial(
    scenario: Scenario,
    params: PlannerParams,
    variant: str,
    base_seed: int,
    trial: int,
    lower_bound: float | None = None,
) -> TrialOutcome:
    checkpoints = params.checkpoints
    try:
        result = plan(scenario, params, RandomStream(base_seed + trial, trial), variant)
        verify_result(scenario, params, result)
        check_lower_bound(scenario, result, lower_bound)
    except Exception as exc:
        logger.exception("%s trial %d on %s failed", variant, trial, scenario.name)
        records = [BenchRecord(variant, trial, cp, False, None, 0, 0) for cp in checkpoints]
        return TrialOutcome(variant, trial, records, error=f"{type(exc).__name__}: {exc}")
    records = [
        BenchRecord(
            planner=variant,
            trial=trial,
            checkpoint=checkpoint,
            success=entry.best_cost is not None,
            best_cost=entry.best_cost,
            nodes=entry.nodes,
            pruned=entry.pruned,
        )
        for checkpoint, entry in zip(checkpoints, result.checkpoints)
    ]
    first = result.improvements[0].best_cost if result.improvements else None
    logger.info(
        "%s trial %d on %s: %d iterations, best %s",
        variant,
        trial,
        scenario.name,
        result.iterations,
        "none" if result.best_cost is None else f"{result.best_cost:.6g}",
    )
    return TrialOutcome(variant, trial, records, first_cost=first, final_cost=result.best_cost)


@dataclass(frozen=True, slots=True)
class TrialJob:
    scenario: Scenario
    params: PlannerParams
    variant: str
    base_seed: int
    trial: int
    lower_bound: float | None = None

    def run(self) -> TrialOutcome:
        return run_trial(self.scenario, self.params, self.variant, self.base_seed, self.trial, self.lower_bound)


def _run_job(job: TrialJob) -> TrialOutcome:
    return job.run()


def worker_count(jobs: Sequence[TrialJob], threads: int | None, cpu_count: int | None = None) -> int:
    """Worker processes for ``jobs``: the setting capped by CPUs and job count.

    Falls back to 1 when the scenario cannot cross a process boundary, e.g. a
    system built from lambdas.
    """

    cpus = cpu_count if cpu_count is not None else (os.cpu_count() or 1)
    workers = min(max(1, threads or get_settings().threads), max(1, cpus), len(jobs))
    if workers <= 1:
        return 1
    try:
        pickle.loads(pickle.dumps(jobs[0]))
    except Exception as exc:
        logger.warning("trials on %s run serially: %s", jobs[0].scenario.name, exc)
        return 1
    return workers


def _execute(jobs: Sequence[TrialJob], threads: int | None) -> list[TrialOutcome]:
    workers = worker_count(jobs, threads)
    if workers == 1:
        return [job.run() for job in jobs]
    logger.info("running %d trials on %d worker processes", len(jobs), workers)
    with ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn")) as pool:
        return list(pool.map(_run_job, jobs))


def run_trials(
    scenario: Scenario,
    params: PlannerParams,
    planners: Sequence[str],
    trials: int,
    base_seed: int,
    threads: int | None = None,
) -> list[TrialOutcome]:
    lower_bound = _oracle_lower_bound(scenario)
    jobs = [
        TrialJob(scenario, params, normalize_variant(variant), base_seed, trial, lower_bound)
        for variant in planners
        for trial in range(trials)
    ]
    outcomes = _execute(jobs, threads)
    return sorted(outcomes, key=lambda outcome: (outcome.planner, outcome.trial))


def summarize_records(records: Iterable[BenchRecord]) -> list[SummaryRow]:
    """Per planner and checkpoint: success rate and population mean/std over successes."""

    groups: dict[tuple[str, float], list[BenchRecord]] = defaultdict(list)
    for record in records:
        groups[(record.planner, record.checkpoint)].append(record)
    rows = []
    for (planner, checkpoint), members in sorted(groups.items()):
        costs = np.array([r.best_cost for r in members if r.success and r.best_cost is not None])
        rows.append(
            SummaryRow(
                planner=planner,
                checkpoint=checkpoint,
                success_rate=costs.size / len(members),
                mean_cost=float(np.mean(costs)) if costs.size else None,
                std_cost=float(np.std(costs)) if costs.size else None,
                n_success=int(costs.size),
            )
        )
    return rows


def package_versions() -> dict[str, str]:
    versions = {"python": platform.python_version()}
    for package in ("numpy", "scipy", "networkx", "pydantic", "orjson"):
        try:
            versions[package] = importlib.metadata.version(package)
        except importlib.metadata.PackageNotFoundError:
            versions[package] = "not-installed"
    return versions


def run_meta(scenario: Scenario, params: PlannerParams, planners: Sequence[str], **extra: Any) -> dict[str, Any]:
    integrator = scenario.integrator(params)
    meta: dict[str, Any] = {
        "schema_version": 1,
        "scenario": scenario.name,
        "system": scenario.system.name,
        "planners": list(planners),
        "weights": {"w_x": params.weights.w_x, "w_c": params.weights.w_c},
        "goal_bias": params.goal_bias,
        "t_prop": params.t_prop,
        "c_max": params.c_max,
        "collision_resolution": params.collision_resolution or integrator.step,
        "integrator_step": integrator.step,
        "checkpoint_unit": "seconds" if params.by_time else "iterations",
        "rng": RandomStream.ALGORITHM,
        "software": package_versions(),
    }
    if scenario.name == "car_parking_lite":
        meta["substitution"] = SUBSTITUTION_NOTE
    meta.update(extra)
    return meta


def _log_entry(entry: LogEntry) -> dict[str, Any]:
    return {
        "iteration": entry.iteration,
        "elapsed_s": entry.elapsed_s,
        "best_cost": entry.best_cost,
        "nodes": entry.nodes,
        "pruned": entry.pruned,
    }


def result_document(scenario: Scenario, params: PlannerParams, result: PlanResult, seed: int) -> dict[str, Any]:
    """JSON-ready view of a single planning run."""

    best = result.best
    solution = None
    if best is not None:
        solution = {
            "cost": best.cost,
            "node_id": best.node_id,
            "schedule": [{"u": segment.u.tolist(), "duration": segment.duration} for segment in best.schedule],
            "times": best.trajectory.times.tolist(),
            "states": best.trajectory.states.tolist(),
        }
    return {
        "meta": run_meta(scenario, params, [result.variant], seed=seed),
        "variant": result.variant,
        "success": result.success,
        "best_cost": result.best_cost,
        "iterations": result.iterations,
        "rounds": result.rounds,
        "nodes": result.node_count,
        "pruned": result.pruned_count,
        "rejections": result.rejections,
        "provenance": dict(sorted(Counter(result.provenance).items())),
        "improvements": [_log_entry(entry) for entry in result.improvements],
        "checkpoints": [_log_entry(entry) for entry in result.checkpoints],
        "solution": solution,
    }


def emit_log_csv(entries: Sequence[LogEntry], path: str | Path) -> Path:
    return write_rows(
        path,
        LOG_HEADER,
        ((e.iteration, e.elapsed_s, e.best_cost, e.nodes, e.pruned) for e in entries),
    )


def run_benchmark(cfg: BenchConfig, *, threads: int | None = None) -> BenchReport:
    scenario = resolve_scenario(cfg.scenario)
    params = bench_params(scenario, cfg)
    outcomes = run_trials(scenario, params, cfg.planners, cfg.trials, cfg.base_seed, threads or cfg.threads)
    records = sorted(
        (record for outcome in outcomes for record in outcome.records),
        key=lambda r: (r.planner, r.trial, r.checkpoint),
    )
    failures = [outcome for outcome in outcomes if outcome.error is not None]
    meta = run_meta(
        scenario,
        params,
        cfg.planners,
        trials=cfg.trials,
        base_seed=cfg.base_seed,
        failed_trials=[
            {"planner": f.planner, "trial": f.trial, "error": f.error} for f in failures
        ],
    )
    return BenchReport(records=records, summary=summarize_records(records), failures=failures, meta=meta)


def emit_csv(records: Sequence[BenchRecord], summary: Sequence[SummaryRow], path: str | Path) -> tuple[Path, Path]:
    """Raw records to ``path`` and the summary next to it."""

    path = Path(path)
    raw = write_rows(path, RAW_HEADER, (record.row() for record in records))
    summary_file = write_rows(summary_path(path), SUMMARY_HEADER, (row.row() for row in summary))
    return raw, summary_file


def write_report(report: BenchReport, path: str | Path) -> list[Path]:
    path = Path(path)
    raw, summary = emit_csv(report.records, report.summary, path)
    return [raw, summary, write_json(meta_path(path), report.meta)]


@dataclass(frozen=True, slots=True)
class ConvergenceRow:
    planner: str
    epsilon: float
    k: int
    failure_rate: float
    trials: int

    def row(self) -> tuple[Any, ...]:
        return (self.planner, self.epsilon, self.k, self.failure_rate, self.trials)


def convergence_experiment(
    scenario: Scenario,
    planner: str,
    epsilons: Sequence[float],
    k_grid: Sequence[int],
    trials: int,
    *,
    base_seed: int = 0,
    threads: int | None = None,
    params: PlannerParams | None = None,
) -> list[ConvergenceRow]:
    """Empirical ``Pr[cost > (1 + eps) * optimum]`` per iteration count.

    Each trial runs once to ``max(k_grid)`` with checkpoints at every ``k``;
    a trial without a solution at ``k`` counts as a failure.
    """

    if scenario.oracle is None:
        raise OracleError(f"scenario {scenario.name!r} has no oracle")
    if trials < 1 or not k_grid:
        raise ParameterError("convergence needs trials >= 1 and a non-empty k grid")
    if any(k < 0 for k in k_grid) or any(eps < 0.0 for eps in epsilons):
        raise ParameterError("k and epsilon values must be non-negative")
    grid = sorted(set(int(k) for k in k_grid))
    optimum = scenario_oracle(scenario).nominal
    base = params or scenario.planner_params(iterations=grid[-1])
    run_params = replace(base, iterations=grid[-1], time_budget=None, checkpoints=tuple(float(k) for k in grid))
    variant = normalize_variant(planner)
    outcomes = run_trials(scenario, run_params, [variant], trials, base_seed, threads)
    rows = []
    for eps in epsilons:
        threshold = (1.0 + eps) * optimum
        for index, k in enumerate(grid):
            failures = sum(
                1
                for outcome in outcomes
                if not outcome.records[index].success or outcome.records[index].best_cost > threshold
            )
            rows.append(ConvergenceRow(variant, float(eps), k, failures / trials, trials))
    return rows


def emit_convergence_csv(rows: Sequence[ConvergenceRow], path: str | Path) -> Path:
    return write_rows(path, CONVERGENCE_HEADER, (row.row() for row in rows))


@dataclass(frozen=True, slots=True)
class SweepRow:
    planner: str
    w_x: float
    w_c: float
    success_rate: float
    mean_first_cost: float | None
    mean_final_cost: float | None
    mean_improvement: float | None
    trials: int

    def row(self) -> tuple[Any, ...]:
        return (
            self.planner,
            self.w_x,
            self.w_c,
            self.success_rate,
            self.mean_first_cost,
            self.mean_final_cost,
            self.mean_improvement,
            self.trials,
        )


def _mean(values: Sequence[float]) -> float | None:
    return float(np.mean(values)) if values else None


def weight_sweep(
    scenario: Scenario,
    planner: str,
    weights: Sequence[MetricWeights],
    trials: int,
    params: PlannerParams,
    *,
    base_seed: int = 0,
    threads: int | None = None,
) -> list[SweepRow]:
    """First-solution vs final cost per metric weighting.

    ``mean_improvement`` is the mean relative drop ``(first - final) / first``
    over successful trials.
    """

    variant = normalize_variant(planner)
    rows = []
    for weight in weights:
        outcomes = run_trials(scenario, params.with_overrides(weights=weight), [variant], trials, base_seed, threads)
        solved = [o for o in outcomes if o.final_cost is not None and o.first_cost is not None]
        improvements = [
            (o.first_cost - o.final_cost) / o.first_cost for o in solved if o.first_cost > 0.0
        ]
        rows.append(
            SweepRow(
                planner=variant,
                w_x=weight.w_x,
                w_c=weight.w_c,
                success_rate=len(solved) / trials,
                mean_first_cost=_mean([o.first_cost for o in solved]),
                mean_final_cost=_mean([o.final_cost for o in solved]),
                mean_improvement=_mean(improvements),
                trials=trials,
            )
        )
    return rows


def emit_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> Path:
    return write_rows(path, SWEEP_HEADER, (row.row() for row in rows))
