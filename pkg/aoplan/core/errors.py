"""Exception hierarchy shared by every planner module."""

from __future__ import annotations


class PlannerError(Exception):
    """Base class for errors raised by the planning library."""


class InvalidScenarioError(PlannerError, ValueError):
    """A scenario, state or goal fails validation."""


class ScenarioParseError(InvalidScenarioError):
    """A scenario file is not well-formed JSON."""


class ParameterError(PlannerError, ValueError):
    """A planner, integrator or benchmark parameter is out of range."""


class PropagationDivergedError(PlannerError, ArithmeticError):
    """Integration produced a non-finite derivative or state."""


class TrajectoryValidationError(PlannerError, ValueError):
    """Stored trajectories, edges or costs are mutually inconsistent."""


class IndexStateError(PlannerError, LookupError):
    """Nearest-neighbor index misuse (empty query, duplicate id)."""


class OracleError(PlannerError, ValueError):
    """An optimality oracle was asked about an unsupported problem."""


class OutputError(PlannerError, OSError):
    """A result file could not be written."""
