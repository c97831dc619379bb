from __future__ import annotations

from math import exp

import numpy as np
import pytest

from aoplan.core.errors import ParameterError, PropagationDivergedError
from aoplan.core.types import AugmentedState, Box, concatenate_trajectories
from aoplan.dynamics.integrate import IntegratorConfig, propagate, propagate_augmented, trajectory_cost
from aoplan.dynamics.systems import (
    AugmentedSystem,
    SystemDefinition,
    linear_system,
    single_integrator_2d,
    time_cost,
)


def _decay() -> SystemDefinition:
    return linear_system([[-1.0]], [[0.0]], state_bounds=Box([-10.0], [10.0]), control_bounds=Box([-1.0], [1.0]))


def _ramp() -> SystemDefinition:
    """``x' = 1`` with running cost ``g = x``."""

    return SystemDefinition(
        name="ramp",
        state_dim=1,
        control_dim=1,
        f=lambda x, u: np.ones(1),
        g=lambda x, u: float(x[0]),
        state_bounds=Box([-10.0], [10.0]),
        control_bounds=Box([-1.0], [1.0]),
    )


def test_constant_velocity() -> None:
    system = single_integrator_2d(speed_limit=None)
    traj = propagate(np.zeros(2), np.array([1.0, 0.0]), 2.0, system, IntegratorConfig(step=0.1))

    np.testing.assert_allclose(traj.final_state, [2.0, 0.0], atol=1e-12)
    assert traj.duration == 2.0
    traj.check_segments()


def test_zero_duration_gives_single_sample() -> None:
    system = single_integrator_2d()
    traj = propagate(np.array([1.0, 2.0]), np.zeros(2), 0.0, system, IntegratorConfig(step=0.1))

    assert len(traj) == 1
    assert traj.times[0] == 0.0
    np.testing.assert_array_equal(traj.states[0], [1.0, 2.0])


def test_exponential_decay_matches_analytic_solution() -> None:
    traj = propagate(np.ones(1), np.zeros(1), 1.0, _decay(), IntegratorConfig(step=0.05))

    assert abs(traj.final_state[0] - exp(-1.0)) < 1e-6


def test_rk4_error_shrinks_sixteenfold_per_halving() -> None:
    errors = [
        abs(propagate(np.ones(1), np.zeros(1), 1.0, _decay(), IntegratorConfig(step=h)).final_state[0] - exp(-1.0))
        for h in (0.1, 0.05, 0.025)
    ]

    for coarse, fine in zip(errors, errors[1:]):
        assert 14.0 <= coarse / fine <= 18.0


def test_time_cost_grows_by_duration() -> None:
    system = AugmentedSystem(single_integrator_2d())
    y, traj = propagate_augmented(
        AugmentedState([0.0, 0.0], 1.5), np.array([0.3, -0.2]), 3.5, system, IntegratorConfig(step=0.02)
    )

    assert y.c == 1.5 + traj.cost
    assert traj.cost == pytest.approx(3.5, abs=1e-12)


def test_effort_cost_of_constant_control() -> None:
    system = AugmentedSystem(single_integrator_2d(max_control=2.0, speed_limit=None, cost="effort"))
    y, _ = propagate_augmented(AugmentedState([0.0, 0.0], 0.0), np.array([2.0, 0.0]), 1.0, system, IntegratorConfig(0.05))

    assert y.c == pytest.approx(4.0, abs=1e-12)


def test_state_dependent_cost_quadrature() -> None:
    y, traj = propagate_augmented(
        AugmentedState([0.0], 0.0), np.zeros(1), 2.0, AugmentedSystem(_ramp()), IntegratorConfig(step=0.1)
    )

    assert y.c == pytest.approx(2.0, abs=1e-12)
    assert trajectory_cost(traj, _ramp()) == pytest.approx(2.0, abs=1e-12)


def test_cost_increment_does_not_depend_on_starting_cost() -> None:
    system = AugmentedSystem(_ramp())
    cfg = IntegratorConfig(step=0.1)
    y0, traj0 = propagate_augmented(AugmentedState([0.5], 0.0), np.zeros(1), 1.3, system, cfg)
    y1, traj1 = propagate_augmented(AugmentedState([0.5], 7.25), np.zeros(1), 1.3, system, cfg)

    np.testing.assert_array_equal(y0.x, y1.x)
    assert traj0.cost == traj1.cost
    assert y1.c == 7.25 + traj1.cost


def test_trajectory_cost_examples() -> None:
    cfg = IntegratorConfig(step=0.1)
    free = propagate(np.zeros(1), np.zeros(1), 1.0, _decay(), cfg)
    timed = SystemDefinition(
        name="timed",
        state_dim=1,
        control_dim=1,
        f=lambda x, u: np.zeros(1),
        g=time_cost,
        state_bounds=Box([-1.0], [1.0]),
        control_bounds=Box([-1.0], [1.0]),
    )
    first = propagate(np.zeros(1), np.zeros(1), 3.0, timed, cfg)
    second = propagate(np.zeros(1), np.zeros(1), 4.0, timed, cfg)

    assert trajectory_cost(free, _decay()) == 0.0
    assert trajectory_cost(concatenate_trajectories([first, second]), timed) == pytest.approx(7.0, abs=1e-12)


def test_duration_beyond_horizon_is_rejected() -> None:
    cfg = IntegratorConfig.for_horizon(1.0)

    assert cfg.step == pytest.approx(0.02)
    with pytest.raises(ParameterError):
        propagate(np.zeros(2), np.zeros(2), 1.5, single_integrator_2d(), cfg)


def test_control_outside_bounds_is_rejected() -> None:
    with pytest.raises(ParameterError):
        propagate(np.zeros(2), np.array([2.0, 0.0]), 1.0, single_integrator_2d(), IntegratorConfig(step=0.1))


def test_non_finite_derivative_diverges() -> None:
    broken = SystemDefinition(
        name="broken",
        state_dim=1,
        control_dim=1,
        f=lambda x, u: np.array([np.inf]),
        g=time_cost,
        state_bounds=Box([-1.0], [1.0]),
        control_bounds=Box([-1.0], [1.0]),
    )

    with pytest.raises(PropagationDivergedError):
        propagate(np.zeros(1), np.zeros(1), 0.5, broken, IntegratorConfig(step=0.1))
