#!/usr/bin/env python3
"""Profile per-iteration cost of the AO-RRT and RRT steps on one scenario."""

from __future__ import annotations

import argparse
import platform
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import orjson


@dataclass(slots=True)
class StepSample:
    iteration: int
    step_us: float
    nodes: int
    added: bool


def summarize(values: Sequence[float]) -> dict[str, float]:
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        return {"p50": 0.0, "p95": 0.0, "max": 0.0, "mean": 0.0}
    return {
        "p50": float(np.percentile(array, 50)),
        "p95": float(np.percentile(array, 95)),
        "max": float(np.max(array)),
        "mean": float(np.mean(array)),
    }


def profile_planner(scenario, params, variant: str, seed: int, warmup: int) -> dict[str, object]:
    from aoplan.core.random_stream import RandomStream
    from aoplan.planners.ao_rrt import PlannerContext, ao_rrt_step, rrt_baseline_step, state_only_weights

    if variant == "rrt":
        ctx = PlannerContext.create(scenario, params, RandomStream(seed), weights=state_only_weights(params.weights))
        step = rrt_baseline_step
    else:
        ctx = PlannerContext.create(scenario, params, RandomStream(seed))
        step = ao_rrt_step

    samples: list[StepSample] = []
    total = params.iterations or 0
    for iteration in range(warmup + total):
        start = time.perf_counter()
        outcome = step(ctx)
        step_us = (time.perf_counter() - start) * 1e6
        if iteration >= warmup:
            samples.append(StepSample(iteration, step_us, len(ctx.tree), outcome.added is not None))

    total_seconds = sum(sample.step_us for sample in samples) / 1e6
    return {
        "summary": {
            "step_us": summarize([sample.step_us for sample in samples]),
            "iterations_per_second": len(samples) / total_seconds if total_seconds > 0 else 0.0,
            "acceptance_rate": float(np.mean([sample.added for sample in samples])) if samples else 0.0,
            "final_nodes": len(ctx.tree),
            "best_cost": ctx.best_cost,
            "rejections": dict(sorted(ctx.rejections.items())),
        },
        "samples": [asdict(sample) for sample in samples[:: max(1, len(samples) // 200)]],
    }


def benchmark(args: argparse.Namespace) -> dict[str, object]:
    from aoplan.bench.harness import package_versions, resolve_scenario

    scenario = resolve_scenario(args.scenario)
    params = scenario.planner_params(iterations=args.iterations, adaptive_cmax=True)
    integrator = scenario.integrator(params)
    return {
        "schema_version": 1,
        "scenario": scenario.name,
        "configuration": {
            "iterations": args.iterations,
            "warmup": args.warmup,
            "seed": args.seed,
            "t_prop": params.t_prop,
            "c_max": params.c_max,
            "integrator_step": integrator.step,
            "collision_resolution": params.collision_resolution or integrator.step,
        },
        "hardware": {
            "platform": platform.platform(),
            "processor": platform.processor(),
        },
        "software": package_versions(),
        "planners": {
            variant: profile_planner(scenario, params, variant, args.seed, args.warmup)
            for variant in args.planners
        },
    }


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", default="geo2d_one_box")
    parser.add_argument("--planners", nargs="+", choices=("ao_rrt", "rrt"), default=["ao_rrt", "rrt"])
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--warmup", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", type=Path)
    args = parser.parse_args(argv)
    if args.iterations < 1 or args.warmup < 0:
        parser.error("--iterations must be positive and --warmup must be non-negative")
    return args


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    result = benchmark(args)
    rendered = orjson.dumps(result, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS).decode()
    if args.output:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(rendered + "\n")
        print(args.output)
    else:
        print(rendered)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
