import math

import numpy as np
import pytest

from wbsolitary import spectral as sp
from wbsolitary.errors import ConfigurationError, ProjectionError
from wbsolitary.functionals import Nonlinearity, ScalarFunctional
from wbsolitary.longwave import exponents, scale_lw
from wbsolitary.minimizer import MinimizationConfig, minimize
from wbsolitary.petviashvili import aligned_distance, scalar_oracle
from wbsolitary.scalar import (
    ScalarProblem,
    default_problem,
    scalar_ground_state,
    scalar_longwave_check,
    scalar_residual,
    solve_scalar,
)
from wbsolitary.spectral import MultiplierOperator, PeriodicGrid, WaveField
from wbsolitary.symbols import builtin_symbol


@pytest.mark.slow
def test_whitham_solve(whitham):
    prob, seed = default_problem(whitham, 1e-3, tol_residual=1e-12)
    res = solve_scalar(prob, seed)
    assert res.backend == "scalar"
    assert res.lam > 1.0
    assert scalar_residual(prob, res) <= 1e-8
    assert (res.lam - 1) == pytest.approx(scalar_ground_state(whitham, Nonlinearity()).nu * 1e-2, rel=0.05)
    # independent fixed-point iteration on the same grid
    gs = scalar_ground_state(whitham, Nonlinearity())
    e = exponents(1, 2)
    seed_pv = scale_lw(gs.profile, 1e-3, e, res.grid, edge_tol=np.inf).samples
    pv = scalar_oracle(prob.functional.operator, Nonlinearity(), 1e-3, 1 + gs.nu * 1e-2, seed_pv)
    dist, _ = aligned_distance(res.w, pv.field)
    assert dist / sp.sobolev_norm(res.w, 1) <= 1e-6


@pytest.mark.slow
def test_kdv_model_matches_longwave():
    s = builtin_symbol("kdv_model")
    q = 1e-4
    prob, seed = default_problem(s, q, tol_residual=1e-12)
    res = solve_scalar(prob, seed)
    dist, _ = aligned_distance(res.w, seed)
    assert dist / sp.sobolev_norm(seed, 1) <= 1e-3


def test_linear_eigenmode(whitham):
    g = PeriodicGrid(64.0, 128)
    F = ScalarFunctional.linear(MultiplierOperator(whitham, g))
    q = 1e-3
    seed = WaveField(g, np.cos(2 * np.pi * g.nodes / 64.0))
    res = minimize(F, MinimizationConfig(q=q), seed)
    expected = float(whitham(np.array([2 * np.pi / 64.0]))[0])
    assert abs(res.lam - expected) <= 1e-10


def test_zero_initial_rejected(whitham):
    prob, seed = default_problem(whitham, 1e-3)
    with pytest.raises(ProjectionError):
        solve_scalar(prob, WaveField.constant(seed.grid, 0.0))


def test_problem_enforces_A3(whitham):
    g = PeriodicGrid(64.0, 128)
    with pytest.raises(ConfigurationError):
        ScalarProblem(ScalarFunctional(MultiplierOperator(whitham, g), Nonlinearity(p=3, c_p=-1)), MinimizationConfig(q=1e-3))


def test_p3_gaussian_seed(whitham):
    prob, seed = default_problem(whitham, 1e-3, Nonlinearity(p=3, c_p=1))
    assert exponents(1, 3).energy_order == 3
    assert seed.samples.max() > 0


def test_scalar_longwave_check(whitham):
    nl = Nonlinearity()
    gs = scalar_ground_state(whitham, nl)
    rep = scalar_longwave_check(whitham, nl, gs, [1e-2, 1e-3, 1e-4])
    assert rep.exponent == pytest.approx(5 / 3)
    assert rep.monotone
    f = WaveField.constant(PeriodicGrid(10.0, 64), math.sqrt(2.0 / 10.0))
    rep_c = scalar_longwave_check(whitham, nl, f, [1e-2, 1e-3])
    # constant field: the limit energy is -c_p int u^3 / 3
    assert rep_c.target == pytest.approx(-10.0 * f.samples[0] ** 3 / 3)


def test_p2_only_closed_form(whitham):
    with pytest.raises(ConfigurationError):
        scalar_ground_state(whitham, Nonlinearity(p=3, c_p=1))
