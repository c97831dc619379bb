"""Seeded, splittable random streams.

Every stream is a numpy ``PCG64`` generator seeded through ``SeedSequence``
with a ``spawn_key`` of ``(trial, purpose)``.  Both algorithms are specified
by numpy independently of platform, so equal seeds give equal draws
everywhere.  Purposes are named so two planners can share exactly the draws
they have in common (for example AO-RRT and RRT share all but ``cost``).
"""

from __future__ import annotations

from typing import Final

import numpy as np

from aoplan.core.errors import ParameterError

PURPOSES: Final[tuple[str, ...]] = (
    "state",
    "cost",
    "duration",
    "control",
    "goal",
    "pln",
    "sst",
    "lipschitz",
)
_MASK64 = (1 << 64) - 1


class RandomStream:
    """Single-owner bundle of named substreams for one trial."""

    ALGORITHM = "numpy.PCG64 via SeedSequence(seed, spawn_key=(trial, purpose))"

    def __init__(self, seed: int, trial: int = 0) -> None:
        if seed < 0 or seed > _MASK64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if trial < 0:
            raise ParameterError("trial index must be non-negative")
        self.seed = int(seed)
        self.trial = int(trial)
        self._streams: dict[str, np.random.Generator] = {}

    def substream(self, purpose: str) -> np.random.Generator:
        generator = self._streams.get(purpose)
        if generator is None:
            try:
                key = PURPOSES.index(purpose)
            except ValueError as exc:
                raise ParameterError(
                    f"unknown stream purpose {purpose!r}; expected one of {PURPOSES}"
                ) from exc
            sequence = np.random.SeedSequence(self.seed, spawn_key=(self.trial, key))
            generator = np.random.Generator(np.random.PCG64(sequence))
            self._streams[purpose] = generator
        return generator

    def for_trial(self, trial: int) -> "RandomStream":
        """Fresh stream for another trial of the same seed."""

        return RandomStream(self.seed, trial)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, trial={self.trial})"
