"""Empirical Lipschitz constants of ``f``, ``g`` and the augmented ``F``."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import sqrt

import numpy as np

from aoplan.core.errors import ParameterError
from aoplan.core.random_stream import RandomStream
from aoplan.dynamics.systems import SystemDefinition

logger = logging.getLogger(__name__)

_MIN_GAP = 1e-12


@dataclass(frozen=True, slots=True)
class LipschitzReport:
    kx_f: float
    ku_f: float
    kx_g: float
    ku_g: float
    kx: float
    ku: float
    n_pairs: int
    bound_kx: float | None = None
    bound_ku: float | None = None
    within_bounds: bool | None = None


def _ratio(numerator: np.ndarray | float, gap: np.ndarray) -> float:
    denominator = sqrt(float(np.dot(gap, gap)))
    if denominator < _MIN_GAP:
        return 0.0
    if isinstance(numerator, np.ndarray):
        return sqrt(float(np.dot(numerator, numerator))) / denominator
    return abs(numerator) / denominator


def verify_lipschitz(
    system: SystemDefinition,
    stream: RandomStream,
    n_pairs: int,
    tolerance: float = 1e-6,
) -> LipschitzReport:
    """Maximum difference quotients over ``n_pairs`` random in-bounds pairs.

    ``kx``/``ku`` are measured on ``F`` with the cost coordinate sampled in
    ``[0, 1]``; when constants are declared they are compared with the
    composed bounds ``hypot(K^f, K^g)``.
    """

    if n_pairs < 1:
        raise ParameterError("n_pairs must be at least 1")
    generator = stream.substream("lipschitz")
    xs, us = system.state_bounds, system.control_bounds
    kx_f = ku_f = kx_g = ku_g = kx = ku = 0.0
    for _ in range(n_pairs):
        x0 = generator.uniform(xs.lo, xs.hi)
        x1 = generator.uniform(xs.lo, xs.hi)
        u0 = generator.uniform(us.lo, us.hi)
        u1 = generator.uniform(us.lo, us.hi)
        c0, c1 = generator.uniform(0.0, 1.0, size=2)

        f00, f10, f01 = system.f(x0, u0), system.f(x1, u0), system.f(x0, u1)
        g00, g10, g01 = system.g(x0, u0), system.g(x1, u0), system.g(x0, u1)
        dx = x0 - x1
        du = u0 - u1
        kx_f = max(kx_f, _ratio(f00 - f10, dx))
        ku_f = max(ku_f, _ratio(f00 - f01, du))
        kx_g = max(kx_g, _ratio(g00 - g10, dx))
        ku_g = max(ku_g, _ratio(g00 - g01, du))
        dF_x = np.append(f00 - f10, g00 - g10)
        dF_u = np.append(f00 - f01, g00 - g01)
        kx = max(kx, _ratio(dF_x, np.append(dx, c0 - c1)))
        ku = max(ku, _ratio(dF_u, du))

    declared = system.declared_lipschitz
    bound_kx = bound_ku = None
    within = None
    if declared is not None:
        bound_kx, bound_ku = declared.kx, declared.ku
        within = kx <= bound_kx * (1.0 + tolerance) + tolerance and ku <= bound_ku * (1.0 + tolerance) + tolerance
        if not within:
            logger.warning(
                "system %s exceeds composed Lipschitz bounds: kx=%.6g>%.6g or ku=%.6g>%.6g",
                system.name,
                kx,
                bound_kx,
                ku,
                bound_ku,
            )
    return LipschitzReport(
        kx_f=kx_f,
        ku_f=ku_f,
        kx_g=kx_g,
        ku_g=ku_g,
        kx=kx,
        ku=ku,
        n_pairs=n_pairs,
        bound_kx=bound_kx,
        bound_ku=bound_ku,
        within_bounds=within,
    )
