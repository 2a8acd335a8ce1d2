import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbsolitary.diagnostics import gradient_check, smooth_random_field
from wbsolitary.errors import AdmissibilityError, AmplitudeError, ConfigurationError, DomainError
from wbsolitary.functionals import (
    Nonlinearity,
    Penalization,
    ScalarFunctional,
    WBFunctional,
    check_nonlinearity,
    constraint_I,
    energy_WB,
    energy_scalar,
    gradient_WB,
    penalized_energy,
    psi,
)
from wbsolitary.spectral import MultiplierOperator, PeriodicGrid, WaveField
from wbsolitary.symbols import builtin_symbol


@pytest.fixture
def wb(bdw, grid2pi):
    return WBFunctional(MultiplierOperator(bdw, grid2pi))


def test_constraint_examples(grid2pi):
    assert constraint_I(WaveField(grid2pi, np.cos(grid2pi.nodes))) == pytest.approx(math.pi / 2, abs=1e-14)
    assert constraint_I(WaveField.constant(grid2pi, 0.0)) == 0.0
    assert constraint_I(WaveField.constant(grid2pi, 0.21)) == pytest.approx(0.5 * 0.0441 * 2 * math.pi, rel=1e-14)


@pytest.mark.parametrize("w, expected", [(0.0, 0.0), (0.21, -0.005), (-0.19, -0.005)])
def test_psi_examples(w, expected):
    assert psi(w) == pytest.approx(expected, abs=1e-16)


def test_psi_domain():
    with pytest.raises(DomainError):
        psi(-1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.99, 3.0))
def test_psi_matches_definition(w):
    assert psi(w) == pytest.approx(math.sqrt(1 + w) - 1 - w / 2, abs=1e-15)
    if 1e-150 < abs(w) < 1e-2:
        # psi = -w^2/8 (1 + O(w)), with full relative accuracy
        assert abs(8 * psi(w) / (w * w) + 1) <= abs(w)


def test_energy_examples(wb, grid2pi):
    x = grid2pi.nodes
    e = energy_WB(wb, WaveField.constant(grid2pi, 0.0))
    assert tuple(e) == (0.0, 0.0, 0.0)
    e = energy_WB(wb, WaveField(grid2pi, 0.01 * np.cos(x)))
    assert e.quadratic == pytest.approx(-(math.pi / 2) * math.tanh(1.0) * 1e-4, rel=1e-13)
    assert np.allclose(e.n_high + e.n_low, e.n_full, atol=1e-12)
    e = energy_WB(wb, WaveField.constant(grid2pi, 0.21))
    assert e.nonlinear == pytest.approx(-2 * math.pi * 2 * (-0.005) * 0.205, rel=1e-12)


def test_gradient_examples(wb, grid2pi):
    x = grid2pi.nodes
    assert np.all(gradient_WB(wb, WaveField.constant(grid2pi, 0.0)).samples == 0.0)
    g = gradient_WB(wb, WaveField.constant(grid2pi, 0.21)).samples
    assert np.max(np.abs(g + 2.0 / 11.0)) <= 1e-15
    eps = 1e-6
    g = gradient_WB(wb, WaveField(grid2pi, eps * np.cos(x))).samples
    assert np.max(np.abs(g + math.tanh(1.0) * eps * np.cos(x))) <= 1e-11


def test_guard(wb, grid2pi):
    with pytest.raises(AmplitudeError) as exc:
        wb.energy(np.full(64, -0.6))
    assert exc.value.max_abs == pytest.approx(0.6)
    with pytest.raises(ConfigurationError):
        WBFunctional(wb.operator, w_min=-1.5)


def test_gradient_consistency_both_backends(bdw):
    grid = PeriodicGrid(8 * math.pi, 128)
    op = MultiplierOperator(bdw, grid)
    rng = np.random.default_rng(7)
    for F in (WBFunctional(op), ScalarFunctional(op, Nonlinearity())):
        rep = gradient_check(F, rng, pairs=20, eps=1e-5)
        assert rep.passed, rep.to_dict()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 63))
def test_translation_invariance(seed, shift):
    grid = PeriodicGrid(20.0, 64)
    F = WBFunctional(MultiplierOperator(builtin_symbol("bdw"), grid))
    w = smooth_random_field(grid, np.random.default_rng(seed), 0.2)
    ws = np.roll(w, shift)
    assert F.energy(ws) == pytest.approx(F.energy(w), abs=1e-12)
    assert constraint_I(WaveField(grid, ws)) == pytest.approx(constraint_I(WaveField(grid, w)), rel=1e-12)


def test_evenness_preserved(bdw):
    grid = PeriodicGrid(20.0, 64)
    F = WBFunctional(MultiplierOperator(bdw, grid))
    w = 0.1 * np.exp(-grid.nodes**2) + 0.05 * np.cos(2 * np.pi * grid.nodes / 20)
    g = F.gradient(w)
    mirror = np.roll(g[::-1], 1)  # x -> -x on nodes -P/2 + jh
    assert np.max(np.abs(g - mirror)) <= 1e-14


def test_nonlinear_part_is_cubic(bdw):
    grid = PeriodicGrid(20.0, 64)
    F = WBFunctional(MultiplierOperator(bdw, grid))
    base = 0.1 * np.exp(-grid.nodes**2)
    ratios = []
    for s in (1.0, 0.5, 0.25, 0.125):
        split = F.energy_split(s * base)
        ratios.append(abs(split.nonlinear) / (s * np.max(np.abs(base))) ** 3)
    assert max(ratios) / min(ratios) < 1.2


def test_wb_without_psi_matches_linear_scalar(bdw):
    grid = PeriodicGrid(20.0, 64)
    op = MultiplierOperator(bdw, grid)
    w = 0.1 * np.exp(-grid.nodes**2)
    a = WBFunctional(op, include_nonlinear=False).gradient(w)
    b = ScalarFunctional.linear(op).gradient(w)
    assert np.array_equal(a, b)


def test_scalar_examples(grid2pi, whitham, bdw):
    F = ScalarFunctional(MultiplierOperator(bdw, grid2pi), Nonlinearity())
    a = 0.1
    assert energy_scalar(F, WaveField.constant(grid2pi, a)) == pytest.approx(
        2 * math.pi * (-a * a / 2 - a**3 / 3), rel=1e-13
    )
    assert energy_scalar(F, WaveField.constant(grid2pi, 0.0)) == 0.0
    Fw = ScalarFunctional(MultiplierOperator(whitham, grid2pi), Nonlinearity(), max_abs=2.0)
    assert Fw.quadratic(np.cos(grid2pi.nodes)) == pytest.approx(-(math.pi / 2) * math.sqrt(math.tanh(1.0)), rel=1e-13)


@pytest.mark.parametrize(
    "nl, ok",
    [
        (Nonlinearity(p=2, c_p=1), True),
        (Nonlinearity(p=2, c_p=-1), True),
        (Nonlinearity(p=3, c_p=1), True),
        (Nonlinearity(p=3, c_p=-1), False),
        (Nonlinearity(p=4, c_p=1, form="odd"), False),
        (Nonlinearity(p=5, c_p=1), False),
        (Nonlinearity(p=2.5, c_p=2), True),
        (Nonlinearity(p=2, c_p=0), False),
    ],
)
def test_A3_enforcement(nl, ok):
    if ok:
        check_nonlinearity(nl, 1)
    else:
        with pytest.raises(ConfigurationError):
            check_nonlinearity(nl, 1)


def test_abs_antiderivative():
    nl = Nonlinearity(p=2.5, c_p=2.0)
    x = np.linspace(-0.5, 0.5, 11)
    h = 1e-6
    fd = (nl.antiderivative(x + h) - nl.antiderivative(x - h)) / (2 * h)
    assert np.allclose(fd, nl.value(x), atol=1e-9)


def test_penalization_examples(wb, grid2pi):
    R = 0.5
    pen = Penalization(R, 1.0)
    assert pen.value(0.9 * R * R) == 0.0
    assert pen.value(2.5 * R * R) == pytest.approx(1.5 * R * R, rel=1e-14)
    assert pen.value(4 * R * R * (1 - 1e-12)) > 1e10
    w = WaveField(grid2pi, 0.01 * np.cos(grid2pi.nodes))
    assert penalized_energy(wb, Penalization(1.0), w) == wb.energy(w.samples)
    with pytest.raises(AdmissibilityError):
        penalized_energy(wb, Penalization(0.001), w)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.0, 3.99))
def test_penalization_C1(R, frac):
    pen = Penalization(R, 1.0)
    t = frac * R * R
    h = 1e-7 * R * R
    if t + h < 4 * R * R:
        fd = (pen.value(t + h) - pen.value(max(t - h, 0))) / (t + h - max(t - h, 0))
        assert fd == pytest.approx(pen.derivative(t), rel=1e-4, abs=1e-6)
