"""Command-line entry point: ``plan run|bench|converge|sweep|scenarios``."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from aoplan.bench.csv_io import write_json
from aoplan.bench.harness import (
    convergence_experiment,
    emit_convergence_csv,
    emit_log_csv,
    emit_sweep_csv,
    load_bench_config,
    resolve_scenario,
    result_document,
    run_benchmark,
    weight_sweep,
    write_report,
)
from aoplan.config import get_settings
from aoplan.core.errors import PlannerError
from aoplan.core.random_stream import RandomStream
from aoplan.metric.nn_index import WEIGHT_PRESETS, MetricWeights
from aoplan.planners.params import VARIANT_ALIASES
from aoplan.planners.run import plan, verify_result
from aoplan.scenarios.builtin import builtin_scenarios, get_scenario
from aoplan.scenarios.io import export_scenario

logger = logging.getLogger(__name__)

# Used by ``run`` when neither --iterations nor --time-budget is given.
DEFAULT_ITERATIONS = 20_000


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _weight_list(text: str) -> list[MetricWeights]:
    """``"1:1,1:0.2,geometric"`` -> weight pairs ``(w_x, w_c)`` or preset names."""

    weights = []
    for pair in text.split(","):
        if pair in WEIGHT_PRESETS:
            weights.append(WEIGHT_PRESETS[pair])
            continue
        try:
            w_x, w_c = (float(value) for value in pair.split(":"))
            weights.append(MetricWeights(w_x, w_c))
        except (ValueError, PlannerError) as exc:
            raise argparse.ArgumentTypeError(f"expected w_x:w_c pairs, got {pair!r}") from exc
    return weights


def _add_budget(parser: argparse.ArgumentParser) -> None:
    budget = parser.add_mutually_exclusive_group()
    budget.add_argument("--iterations", type=int, help="Iteration cap (deterministic mode)")
    budget.add_argument("--time-budget", type=float, help="Wallclock budget in seconds")


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--w-x", type=float, help="State weight of the nearest-neighbor metric")
    parser.add_argument("--w-c", type=float, help="Cost weight of the nearest-neighbor metric")
    parser.add_argument("--c-max", type=float, help="Initial cost sampling bound")
    parser.add_argument("--t-prop", type=float, help="Maximum propagation duration")
    parser.add_argument("--goal-bias", type=float, help="Probability of sampling inside the goal")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plan", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)
    planners = sorted(VARIANT_ALIASES)

    run = commands.add_parser("run", help="Plan once and write the result")
    run.add_argument("--scenario", required=True, help="Built-in scenario name or scenario JSON path")
    run.add_argument("--planner", choices=planners, default="ao-rrt")
    run.add_argument("--seed", type=int, default=0)
    _add_budget(run)
    _add_overrides(run)
    run.add_argument("--checkpoints", type=_float_list, default=[], help="Comma-separated checkpoints")
    run.add_argument("--pln", choices=("density", "noop"), default="density", help="Hybrid exploration strategy")
    run.add_argument("--out", type=Path, help="Result path: .json for the full result, .csv for the checkpoint log")

    bench = commands.add_parser("bench", help="Multi-trial benchmark from a config file")
    bench.add_argument("--config", type=Path, required=True)
    bench.add_argument("--threads", type=int, help="Worker processes for trials (default: AOPLAN_THREADS)")
    bench.add_argument("--out", type=Path, help="Raw CSV path (overrides the config output)")

    converge = commands.add_parser("converge", help="Empirical failure rate against the oracle optimum")
    converge.add_argument("--scenario", required=True)
    converge.add_argument("--planner", choices=planners, default="ao-rrt")
    converge.add_argument("--eps", type=_float_list, required=True, help="Comma-separated epsilons")
    converge.add_argument("--k-grid", type=_int_list, required=True, help="Comma-separated iteration counts")
    converge.add_argument("--trials", type=int, default=30)
    converge.add_argument("--seed", type=int, default=0, help="Base seed")
    converge.add_argument("--threads", type=int)
    converge.add_argument("--out", type=Path, required=True)

    sweep = commands.add_parser("sweep", help="First vs final cost over metric weightings")
    sweep.add_argument("--scenario", required=True)
    sweep.add_argument("--planner", choices=planners, default="ao-rrt")
    sweep.add_argument("--weights", type=_weight_list, required=True, help="Comma-separated w_x:w_c pairs")
    sweep.add_argument("--trials", type=int, default=20)
    _add_budget(sweep)
    sweep.add_argument("--seed", type=int, default=0, help="Base seed")
    sweep.add_argument("--threads", type=int)
    sweep.add_argument("--out", type=Path, required=True)

    scenarios = commands.add_parser("scenarios", help="List or export the built-in scenarios")
    actions = scenarios.add_subparsers(dest="action", required=True)
    actions.add_parser("list", help="Print the built-in scenarios")
    export = actions.add_parser("export", help="Write a built-in scenario as JSON")
    export.add_argument("name")
    export.add_argument("--out", type=Path, required=True)
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be non-negative")
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be positive")
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads must be positive")
    return args


def _weights(scenario_weights: MetricWeights, w_x: float | None, w_c: float | None) -> MetricWeights | None:
    if w_x is None and w_c is None:
        return None
    return MetricWeights(
        w_x if w_x is not None else scenario_weights.w_x,
        w_c if w_c is not None else scenario_weights.w_c,
    )


def _budget(args: argparse.Namespace) -> tuple[int | None, float | None]:
    if args.iterations is None and args.time_budget is None:
        return DEFAULT_ITERATIONS, None
    return args.iterations, args.time_budget


def command_run(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    iterations, time_budget = _budget(args)
    params = scenario.planner_params(
        iterations=iterations,
        time_budget=time_budget,
        checkpoints=tuple(args.checkpoints) or None,
        weights=_weights(scenario.weights, args.w_x, args.w_c),
        c_max=args.c_max,
        t_prop=args.t_prop,
        goal_bias=args.goal_bias,
        pln=args.pln,
    )
    result = plan(scenario, params, RandomStream(args.seed), args.planner)
    verify_result(scenario, params, result)
    if args.out is not None and args.out.suffix == ".csv":
        print(emit_log_csv(result.checkpoints or result.improvements, args.out))
        return 0
    document = result_document(scenario, params, result, args.seed)
    if args.out is None:
        args.out = get_settings().output_root / f"{scenario.name}_{result.variant}_{args.seed}.json"
    print(write_json(args.out, document))
    return 0


def command_bench(args: argparse.Namespace) -> int:
    cfg = load_bench_config(args.config)
    report = run_benchmark(cfg, threads=args.threads)
    out = args.out or cfg.output or get_settings().output_root / f"{Path(cfg.scenario).stem}_bench.csv"
    for path in write_report(report, out):
        print(path)
    if report.failures:
        logger.warning("%d trial(s) failed; see the meta file", len(report.failures))
    return 0


def command_converge(args: argparse.Namespace) -> int:
    rows = convergence_experiment(
        resolve_scenario(args.scenario),
        args.planner,
        args.eps,
        args.k_grid,
        args.trials,
        base_seed=args.seed,
        threads=args.threads,
    )
    print(emit_convergence_csv(rows, args.out))
    return 0


def command_sweep(args: argparse.Namespace) -> int:
    scenario = resolve_scenario(args.scenario)
    iterations, time_budget = _budget(args)
    params = scenario.planner_params(iterations=iterations, time_budget=time_budget)
    rows = weight_sweep(
        scenario,
        args.planner,
        args.weights,
        args.trials,
        params,
        base_seed=args.seed,
        threads=args.threads,
    )
    print(emit_sweep_csv(rows, args.out))
    return 0


def command_scenarios(args: argparse.Namespace) -> int:
    if args.action == "export":
        print(export_scenario(get_scenario(args.name), args.out))
        return 0
    for name, scenario in builtin_scenarios().items():
        oracle = scenario.oracle or "-"
        print(f"{name}\t{scenario.system.name}\t{oracle}\t{scenario.description}")
    return 0


COMMANDS = {
    "run": command_run,
    "bench": command_bench,
    "converge": command_converge,
    "sweep": command_sweep,
    "scenarios": command_scenarios,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=get_settings().log_level)
    try:
        return COMMANDS[args.command](args)
    except PlannerError as exc:
        print(f"plan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
