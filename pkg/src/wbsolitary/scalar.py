"""Scalar travelling waves ``K u - c u + n(u) = 0`` on the shared minimizer machinery."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import spectral as sp
from .errors import ConfigurationError
from .functionals import Nonlinearity, ScalarFunctional, check_nonlinearity
from .longwave import (
    ConvergenceReport,
    GroundState,
    exponents,
    ground_state,
    longwave_grid,
    scale_lw,
)
from .minimizer import MinimizationConfig, MinimizerResult, minimize
from .spectral import MultiplierOperator, PeriodicGrid, WaveField
from .symbols import Symbol


@dataclass
class ScalarProblem:
    functional: ScalarFunctional
    config: MinimizationConfig

    def __post_init__(self):
        nl = self.functional.nonlinearity
        if nl is not None:
            check_nonlinearity(nl, self.functional.operator.symbol.j_star)


def scalar_ground_state(symbol: Symbol, nonlinearity: Nonlinearity) -> GroundState:
    """sech^2 minimizer of ``int A (u')**2 - c_p u**3 / 3`` (quadratic ``n`` only)."""
    if nonlinearity.p != 2:
        raise ConfigurationError("closed-form limit profile exists only for p = 2")
    return ground_state(symbol, cubic=-nonlinearity.c_p / 3.0)


def default_problem(
    symbol: Symbol,
    q: float,
    nonlinearity: Nonlinearity | None = None,
    grid: PeriodicGrid | None = None,
    **config_kw,
) -> tuple[ScalarProblem, WaveField]:
    """Problem on an auto-sized grid with the long-wave seed (p = 2) or a Gaussian seed."""
    nl = nonlinearity or Nonlinearity()
    exps = exponents(symbol.j_star, nl.p)
    if nl.p == 2:
        gs = scalar_ground_state(symbol, nl)
        profile, width = gs.profile, 1.0 / gs.b
    else:
        sign = 1.0 if nl.c_p > 0 else -1.0
        profile = lambda x: sign * math.sqrt(2.0 / math.sqrt(math.pi)) * np.exp(-0.5 * x**2) / 1.0
        width = 1.0
    grid = grid or longwave_grid(profile, q, exps, width=width)
    seed = scale_lw(profile, q, exps, grid, edge_tol=np.inf)
    F = ScalarFunctional(MultiplierOperator(symbol, grid), nl)
    return ScalarProblem(F, MinimizationConfig(q=q, **config_kw)), seed


def solve_scalar(prob: ScalarProblem, initial: WaveField, **kw) -> MinimizerResult:
    """Minimize the scalar energy on ``I = q``; ``result.lam`` is the wave speed ``nu``."""
    res = minimize(prob.functional, prob.config, initial, **kw)
    res.backend = "scalar"
    return res


def scalar_residual(prob: ScalarProblem, res: MinimizerResult) -> float:
    r = prob.functional.el_residual(res.w.samples, res.lam)
    return math.sqrt(sp.sobolev_sq(res.w.grid, r, 1.0))


def scalar_longwave_check(
    symbol: Symbol,
    nonlinearity: Nonlinearity,
    profile,
    q_list: Sequence[float],
    limit_energy: float | None = None,
) -> ConvergenceReport:
    """Ratio ``(E(S u) + q m(0)) / q**(1 + (p-1) alpha)`` against the scalar limit energy.

    ``profile`` is a unit-mass :class:`GroundState` or a :class:`WaveField`
    (scaled exactly by relabelling nodes).
    """
    from .longwave import longwave_energy, longwave_identity_check

    exps = exponents(symbol.j_star, nonlinearity.p)
    if limit_energy is None:
        if isinstance(profile, GroundState):
            limit_energy = profile.energy_lw
        else:
            limit_energy = longwave_energy(
                symbol, profile, potential=lambda u: -nonlinearity.antiderivative(u)
            )
    return longwave_identity_check(
        symbol,
        profile,
        q_list,
        make_functional=lambda op: ScalarFunctional(op, nonlinearity),
        exps=exps,
        limit_energy=limit_energy,
    )
