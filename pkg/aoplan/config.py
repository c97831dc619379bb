"""Runtime configuration for the planning library and benchmark CLI."""

from __future__ import annotations

import os
from functools import lru_cache
from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings


def _default_thread_count(cpu_count: int | None = None) -> int:
    """Trials are single-threaded; a few workers saturate a laptop."""

    count = cpu_count if cpu_count is not None else (os.cpu_count() or 1)
    return max(1, min(4, int(count)))


class Settings(BaseSettings):
    """Central place for tunable planner and harness parameters."""

    log_level: str = Field(default="WARNING", validation_alias="AOPLAN_LOG_LEVEL")
    threads: int = Field(
        default_factory=_default_thread_count,
        validation_alias="AOPLAN_THREADS",
    )
    nn_check: bool = Field(default=False, validation_alias="AOPLAN_NN_CHECK")
    timer_stride: int = Field(default=64, validation_alias="AOPLAN_TIMER_STRIDE")
    max_step: float = Field(default=0.02, validation_alias="AOPLAN_MAX_STEP")
    output_root: Path = Field(default=Path("tmp/results"), validation_alias="AOPLAN_OUTPUT_ROOT")

    model_config = {
        "frozen": True,
    }


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return a singleton settings object."""

    return Settings()
