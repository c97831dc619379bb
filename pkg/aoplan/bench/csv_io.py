"""CSV and JSON emission for benchmark artifacts."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import orjson

from aoplan.core.errors import OutputError

RAW_HEADER = ("planner", "trial", "checkpoint", "success", "best_cost", "nodes", "pruned")
SUMMARY_HEADER = ("planner", "checkpoint", "success_rate", "mean_cost", "std_cost", "n_success")
LOG_HEADER = ("iteration", "elapsed_s", "best_cost", "nodes", "pruned")
CONVERGENCE_HEADER = ("planner", "epsilon", "k", "failure_rate", "trials")
SWEEP_HEADER = (
    "planner",
    "w_x",
    "w_c",
    "success_rate",
    "mean_first_cost",
    "mean_final_cost",
    "mean_improvement",
    "trials",
)


def fmt(value: float | int | bool | str | None) -> str:
    """Six significant digits for floats; empty for missing values."""

    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int) or isinstance(value, str):
        return str(value)
    return f"{value:.6g}"


def summary_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_summary.csv")


def meta_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_meta.json")


def write_rows(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt(value) for value in row])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_json(path: str | Path, payload: Mapping[str, Any]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS) + b"\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
