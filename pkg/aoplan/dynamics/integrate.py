"""Fixed-step RK4 forward propagation.

State and cost are integrated together as one joint vector ``(x, c)``, i.e.
the augmented system ``F``.  The integrator accumulates increments relative
to the start point and stores ``z0 + offset`` at every step.  Because ``F``
never reads ``c``, the cost offset is independent of the starting cost, so
``c_new = c_near + cost`` holds exactly and integrating ``F`` as an ordinary
system over ``Y`` reproduces the augmented result bit for bit.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import accumulate
from math import isfinite
from typing import Literal

import numpy as np

from aoplan.config import get_settings
from aoplan.core.errors import ParameterError, PropagationDivergedError, TrajectoryValidationError
from aoplan.core.types import (
    AugmentedState,
    Control,
    ControlSegment,
    State,
    Trajectory,
)
from aoplan.dynamics.systems import AugmentedSystem, SystemDefinition

# Remainders shorter than this fraction of ``h`` are folded into the last step.
_REMAINDER_FRACTION = 1e-9


@dataclass(frozen=True, slots=True)
class IntegratorConfig:
    step: float
    max_duration: float | None = None
    method: Literal["rk4"] = "rk4"

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ParameterError(f"integrator step must be positive, got {self.step}")
        if self.max_duration is not None and not self.max_duration > 0.0:
            raise ParameterError("max_duration (T_prop) must be positive")
        if self.method != "rk4":
            raise ParameterError(f"unsupported integrator {self.method!r}")

    @classmethod
    def for_horizon(cls, t_prop: float, step: float | None = None) -> "IntegratorConfig":
        """Default ``h = min(T_prop / 20, max_step)`` unless overridden."""

        if step is None:
            step = min(t_prop / 20.0, get_settings().max_step)
        return cls(step=step, max_duration=t_prop)


def _step_sizes(duration: float, h: float) -> list[float]:
    full = int(duration // h)
    steps = [h] * full
    remainder = duration - full * h
    if remainder > _REMAINDER_FRACTION * h:
        steps.append(remainder)
    elif steps:
        steps[-1] = duration - (full - 1) * h
    return steps


def _stage(system: SystemDefinition, z: np.ndarray, u: Control, out: np.ndarray) -> None:
    """Write ``(f(x, u), g(x, u))`` into ``out``; finiteness is checked by the caller."""

    d = system.state_dim
    x = z[:d]
    out[:d] = system.f(x, u)
    out[d] = system.g(x, u)


def _check_inputs(u: Control, t: float, system: SystemDefinition, cfg: IntegratorConfig) -> None:
    if not t >= 0.0:
        raise ParameterError(f"propagation duration must be non-negative, got {t}")
    if cfg.max_duration is not None and t > cfg.max_duration:
        raise ParameterError(f"propagation duration {t} exceeds T_prop={cfg.max_duration}")
    if u.shape != (system.control_dim,):
        raise ParameterError(f"control has shape {u.shape}, expected ({system.control_dim},)")
    if not system.control_bounds.contains(u):
        raise ParameterError(f"control {u} outside control bounds")


def integrate_joint(
    z0: np.ndarray,
    u: Control,
    t: float,
    system: SystemDefinition,
    cfg: IntegratorConfig,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Integrate ``(x, c)`` from ``z0``; return sample times, samples and cost increment.

    Stage buffers are allocated once per call.  A non-finite derivative
    poisons the accumulated offset for good, so one check at the end catches
    divergence anywhere along the way.
    """

    _check_inputs(u, t, system, cfg)
    steps = _step_sizes(float(t), cfg.step)
    size = z0.size
    samples = np.empty((len(steps) + 1, size))
    samples[0] = z0
    offset = np.zeros(size)
    k1, k2, k3, k4, stage = (np.empty(size) for _ in range(5))
    with np.errstate(over="ignore", invalid="ignore"):
        for index, dt in enumerate(steps):
            half = 0.5 * dt
            z = samples[index]
            _stage(system, z, u, k1)
            np.multiply(k1, half, out=stage)
            stage += z
            _stage(system, stage, u, k2)
            np.multiply(k2, half, out=stage)
            stage += z
            _stage(system, stage, u, k3)
            np.multiply(k3, dt, out=stage)
            stage += z
            _stage(system, stage, u, k4)
            k2 += k3
            k2 *= 2.0
            k2 += k1
            k2 += k4
            k2 *= dt / 6.0
            offset += k2
            np.add(z0, offset, out=samples[index + 1])
    if not np.isfinite(offset).all():
        raise PropagationDivergedError(f"integration from {z0} under u={u} is not finite")
    times = np.arange(len(steps) + 1, dtype=np.float64) * cfg.step
    if steps:
        times[-1] = float(t)
    return times, samples, float(offset[-1])


def propagate(
    x: State,
    u: Control,
    t: float,
    system: SystemDefinition,
    cfg: IntegratorConfig,
) -> Trajectory:
    """State-only propagation; the returned trajectory carries zero cost."""

    u = np.asarray(u, dtype=np.float64)
    times, samples, _ = integrate_joint(np.append(x, 0.0), u, t, system, cfg)
    states = samples[:, : system.state_dim]
    states.setflags(write=False)
    times.setflags(write=False)
    return Trajectory(times=times, states=states, segments=(ControlSegment(u, t),), cost=0.0)


def propagate_augmented(
    y: AugmentedState,
    u: Control,
    t: float,
    system: AugmentedSystem,
    cfg: IntegratorConfig,
) -> tuple[AugmentedState, Trajectory]:
    """Propagate ``y`` under ``F``; ``Trajectory.cost`` is the cost increment."""

    base = system.base
    u = np.asarray(u, dtype=np.float64)
    times, samples, increment = integrate_joint(np.append(y.x, y.c), u, t, base, cfg)
    states = samples[:, : base.state_dim]
    states.setflags(write=False)
    times.setflags(write=False)
    trajectory = Trajectory(times=times, states=states, segments=(ControlSegment(u, t),), cost=increment)
    return AugmentedState(states[-1], y.c + increment), trajectory


def trajectory_cost(traj: Trajectory, system: SystemDefinition) -> float:
    """Recompute the RK4 cost quadrature over the stored samples."""

    if len(traj) <= 1:
        return 0.0
    traj.check_segments()
    if not traj.segments:
        raise TrajectoryValidationError("trajectory has samples but no control segments")
    boundaries = list(accumulate(segment.duration for segment in traj.segments))
    size = system.state_dim + 1
    k1, k2, k3, k4 = (np.empty(size) for _ in range(4))
    total = 0.0
    for index in range(len(traj) - 1):
        start, end = float(traj.times[index]), float(traj.times[index + 1])
        segment = min(bisect_right(boundaries, 0.5 * (start + end)), len(boundaries) - 1)
        u = traj.segments[segment].u
        dt = end - start
        z = np.append(traj.states[index], 0.0)
        _stage(system, z, u, k1)
        _stage(system, z + 0.5 * dt * k1, u, k2)
        _stage(system, z + 0.5 * dt * k2, u, k3)
        _stage(system, z + dt * k3, u, k4)
        total += (dt / 6.0) * (k1[-1] + 2.0 * k2[-1] + 2.0 * k3[-1] + k4[-1])
    if not isfinite(total):
        raise PropagationDivergedError("trajectory cost is not finite")
    return total
