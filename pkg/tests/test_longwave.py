import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wbsolitary.errors import ConfigurationError, SupportError
from wbsolitary.functionals import constraint_I
from wbsolitary.longwave import (
    exponents,
    ground_state,
    longwave_grid,
    longwave_identity_check,
    minimizer_distance,
    minimizer_distance_report,
    scale_field,
    scale_lw,
    unscale_field,
    unscale_to,
)
from wbsolitary.spectral import PeriodicGrid, WaveField
from wbsolitary.symbols import Symbol, builtin_symbol

from conftest import solve_bdw


@pytest.mark.parametrize(
    "j, p, alpha, beta",
    [(1, 2, Fraction(2, 3), Fraction(1, 3)), (1, 3, Fraction(1), Fraction(1)), (2, 2, Fraction(4, 7), Fraction(1, 7))],
)
def test_exponent_examples(j, p, alpha, beta):
    e = exponents(j, p)
    assert (e.alpha, e.beta) == (alpha, beta)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.fractions(min_value=2, max_value=25, max_denominator=50))
def test_exponent_identities(j, p):
    if p >= 4 * j + 1:
        with pytest.raises(ConfigurationError):
            exponents(j, p)
        return
    e = exponents(j, p)
    assert 2 * e.alpha - e.beta == 1
    assert (p - 1) * e.alpha == 2 * j * e.beta


def test_exponent_range():
    with pytest.raises(ConfigurationError):
        exponents(1, 1.5)


def test_bdw_ground_state_oracle(bdw):
    gs = ground_state(bdw)
    b = (27 / 128) ** (1 / 3)
    assert gs.b == pytest.approx(b, rel=1e-14)
    assert gs.a == pytest.approx(8 / 3 * b * b, rel=1e-14)
    assert gs.amplitude < 0
    assert gs.energy_lw == pytest.approx(-0.8 * b * b, rel=1e-14)
    assert gs.a == pytest.approx(0.94494, abs=5e-5)
    assert gs.b == pytest.approx(0.59527, abs=1e-5)
    assert gs.energy_lw == pytest.approx(-0.28348, abs=1e-5)
    # independent line quadrature
    mass = 0.5 * quad(lambda x: gs.profile(x) ** 2, -60, 60, limit=200)[0]
    assert mass == pytest.approx(1.0, abs=1e-10)
    e_line = quad(
        lambda x: gs.A * (2 * gs.amplitude * gs.b * math.tanh(gs.b * x) / math.cosh(gs.b * x) ** 2) ** 2
        + gs.B * gs.profile(x) ** 3,
        -60,
        60,
        limit=200,
    )[0]
    assert e_line == pytest.approx(gs.energy_lw, abs=1e-10)


@pytest.mark.parametrize("name", ["bdw", "whitham"])
def test_ground_state_invariants(name):
    gs = ground_state(builtin_symbol(name))
    f = gs.field()
    assert constraint_I(f) == pytest.approx(1.0, abs=1e-10)
    assert gs.el_residual() <= 1e-10
    assert gs.energy_lw < 0
    assert gs.quadrature_energy() == pytest.approx(gs.energy_lw, abs=1e-10)


def test_whitham_ground_state():
    gs = ground_state(builtin_symbol("whitham"))
    b = (27 / 32) ** (1 / 3)
    assert gs.b == pytest.approx(b, rel=1e-14)
    assert gs.A == pytest.approx(1 / 12)


def test_ground_state_jstar2_unavailable():
    s = Symbol(lambda k: 1 / (1 + k**4 / 24), -4.0, 1.0, 2, -1.0, "quartic")
    with pytest.raises(ConfigurationError, match="explicit form unavailable"):
        ground_state(s)


def test_scale_lw_examples(bdw):
    gs = ground_state(bdw)
    e = exponents(1, 2)
    q = 1e-3
    grid = longwave_grid(gs.profile, q, e, width=1 / gs.b)
    sw = scale_lw(gs.profile, q, e, grid)
    assert constraint_I(sw) == pytest.approx(q, rel=1e-10)
    assert sw.samples.min() == pytest.approx(-0.94494e-2, rel=1e-4)
    # depth factor 1e-2 and width factor 10 at q = 1e-3
    assert q**e.a == pytest.approx(1e-2) and q ** (-e.b) == pytest.approx(10.0)
    with pytest.raises(SupportError):
        scale_lw(gs.profile, q, e, PeriodicGrid(20.0, 64))


def test_scaling_round_trip(bdw):
    gs = ground_state(bdw)
    e = exponents(1, 2)
    f = gs.field(PeriodicGrid(60.0, 512))
    q = 1e-3
    back = unscale_field(scale_field(f, q, e), q, e)
    assert np.max(np.abs(back.samples - f.samples)) <= 1e-13
    sw = scale_field(f, q, e)
    back2 = unscale_to(sw, q, e, f.grid)
    assert np.max(np.abs(back2.samples - f.samples)) <= 1e-10


def test_identity_check_bdw(bdw):
    gs = ground_state(bdw)
    rep = longwave_identity_check(bdw, gs, [1e-2, 1e-3, 1e-4])
    assert rep.monotone
    assert rep.exponent == pytest.approx(5 / 3)
    assert abs(rep.rows[-1].defect) <= 0.05 * abs(gs.energy_lw)
    assert rep.to_csv().splitlines()[0] == "q,ratio,defect,N,P"
    with pytest.raises(ConfigurationError):
        longwave_identity_check(bdw, gs, [1e-4, 1e-3])


def test_identity_check_constant_field(bdw):
    # a constant field: the derivative term vanishes and E_lw is pure cubic
    f = WaveField.constant(PeriodicGrid(10.0, 64), -math.sqrt(2.0 / 10.0))
    rep = longwave_identity_check(bdw, f, [1e-2, 1e-3, 1e-4])
    assert rep.target == pytest.approx(0.25 * 10.0 * f.samples[0] ** 3)
    assert rep.monotone


def test_leading_term(bdw):
    gs = ground_state(bdw)
    e = exponents(1, 2)
    for q in (1e-3, 1e-4):
        sw = scale_lw(gs.profile, q, e, longwave_grid(gs.profile, q, e, width=1 / gs.b))
        from wbsolitary.functionals import WBFunctional
        from wbsolitary.spectral import MultiplierOperator

        F = WBFunctional(MultiplierOperator(bdw, sw.grid))
        quadratic = F.energy_split(sw.samples).quadratic
        assert abs(quadratic + q) <= 10 * q ** (1 + 2 * float(e.beta))


def test_distance_zero_for_exact_scaling(bdw):
    gs = ground_state(bdw)
    e = exponents(1, 2)
    f = gs.field(PeriodicGrid(80.0, 1024))
    q = 1e-3
    d, shift, _ = minimizer_distance(scale_field(f, q, e), q, gs, e)
    assert d <= 1e-13 and shift == 0


def test_distance_report_flags_constant(bdw):
    from wbsolitary.minimizer import MinimizerResult

    gs = ground_state(bdw)
    grid = PeriodicGrid(400.0, 256)
    q = 1e-3
    w = WaveField.constant(grid, -math.sqrt(2 * q / 400.0))
    res = MinimizerResult(w, 1.0, 0.0, 0, 0.0, False, False, q, 1.0, 0.0)
    rep = minimizer_distance_report([res], gs)
    assert rep.rows[0].flag == "non-solitary branch"


@pytest.mark.slow
def test_minimizer_distance_decreases():
    gs = ground_state(builtin_symbol("bdw"))
    results = [solve_bdw(q)[1] for q in (1e-2, 1e-3, 1e-4)]
    rep = minimizer_distance_report(results, gs)
    assert rep.decreasing_with_q
    assert rep.rows[-1].distance <= 0.1
    assert all(r.flag == "" for r in rep.rows)
