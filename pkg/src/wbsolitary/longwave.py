"""Long-wave scaling, the limit functional and its sech^2 ground state.

The long-wave test function is ``(S w)(x) = q**alpha * w(q**beta * x)`` with
``alpha = 2 j*/(4 j* + 1 - p)`` and ``beta = (p - 1)/(4 j* + 1 - p)``.  For
``j* = 1`` and a cubic limit nonlinearity the limit functional

    E_lw(w) = int A (w')**2 + B w**3,    A = |m''(0)|/4,

is minimized on ``{I(w) = 1}`` by ``s sech^2(b x)`` with ``nu = 8 A b**2``,
``s = -4 A b**2 / B`` and ``b**3 = 3 B**2 / (32 A**2)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import spectral as sp
from .errors import ConfigurationError, ContractViolation, SupportError
from .spectral import MultiplierOperator, PeriodicGrid, WaveField
from .symbols import Symbol


@dataclass(frozen=True)
class ScalingExponents:
    alpha: Fraction
    beta: Fraction
    p: Fraction
    j_star: int

    @property
    def a(self) -> float:
        return float(self.alpha)

    @property
    def b(self) -> float:
        return float(self.beta)

    @property
    def energy_order(self) -> Fraction:
        """Exponent ``1 + (p - 1) alpha`` of the limit-energy term."""
        return 1 + (self.p - 1) * self.alpha


def exponents(j_star: int, p=2) -> ScalingExponents:
    if int(j_star) != j_star or j_star < 1:
        raise ConfigurationError(f"j* must be a positive integer, got {j_star}")
    j = int(j_star)
    pf = Fraction(p).limit_denominator(10**6) if not isinstance(p, Fraction) else p
    if not (2 <= pf < 4 * j + 1):
        raise ConfigurationError(f"p = {p} outside [2, {4 * j + 1})")
    den = 4 * j + 1 - pf
    alpha = Fraction(2 * j) / den
    beta = (pf - 1) / den
    assert 2 * alpha - beta == 1 and (pf - 1) * alpha == 2 * j * beta
    return ScalingExponents(alpha, beta, pf, j)


# --------------------------------------------------------------------------
# Limit functional


def limit_coefficients(symbol: Symbol, cubic: float | None = None) -> tuple[float, float]:
    """``(A, B)`` of ``E_lw = int A (w^(j*))**2 + B w**3``; ``B`` defaults to ``m(0)/4``."""
    j = symbol.j_star
    A = -symbol.d2j_at_zero / (2.0 * math.factorial(2 * j))
    B = symbol.m_at_zero / 4.0 if cubic is None else float(cubic)
    return A, B


def longwave_energy(
    symbol: Symbol, w: WaveField, cubic: float | None = None, potential: Callable | None = None
) -> float:
    """Evaluate the limit functional on a periodic field by spectral quadrature.

    ``potential`` replaces ``B w**3`` by an arbitrary pointwise density (used
    by the scalar backend for general ``p``).
    """
    A, B = limit_coefficients(symbol, cubic)
    g = w.grid
    dj = sp.derivative(g, w.samples, symbol.j_star)
    dens = potential(w.samples) if potential is not None else B * w.samples**3
    return A * sp.inner(g, dj, dj) + sp.integrate(g, dens)


@dataclass(frozen=True)
class GroundState:
    a: float
    b: float
    sign: float
    A: float
    B: float
    nu: float
    energy_lw: float
    symbol_name: str = ""

    @property
    def amplitude(self) -> float:
        """Signed peak value ``s`` of ``s sech^2(b x)``."""
        return self.sign * self.a

    def profile(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude / np.cosh(self.b * x) ** 2

    __call__ = profile

    def natural_grid(self, tol: float = 1e-12) -> PeriodicGrid:
        return sp.auto_grid(self.profile, 1.0 / self.b, min_period=16.0, width_factor=40.0, tail_tol=tol)

    def field(self, grid: PeriodicGrid | None = None) -> WaveField:
        grid = grid or self.natural_grid()
        return WaveField(grid, self.profile(grid.nodes))

    def el_residual(self, grid: PeriodicGrid | None = None) -> float:
        """L2 norm of ``-2A w'' + 3B w**2 + nu w`` on ``grid``."""
        w = self.field(grid)
        g = w.grid
        r = -2.0 * self.A * sp.derivative(g, w.samples, 2) + 3.0 * self.B * w.samples**2 + self.nu * w.samples
        return math.sqrt(sp.inner(g, r, r))

    def quadrature_energy(self, grid: PeriodicGrid | None = None) -> float:
        w = self.field(grid)
        g = w.grid
        d = sp.derivative(g, w.samples, 1)
        return self.A * sp.inner(g, d, d) + self.B * sp.integrate(g, w.samples**3)


def ground_state(symbol: Symbol, cubic: float | None = None) -> GroundState:
    """Closed-form minimizer of the limit functional on the unit sphere (``j* = 1``)."""
    if symbol.j_star != 1:
        raise ConfigurationError(
            "explicit form unavailable for j* != 1; use a numerical limit-problem minimizer"
        )
    if not (symbol.d2j_at_zero < 0 and symbol.m_at_zero > 0):
        raise ConfigurationError("ground state needs m''(0) < 0 and m(0) > 0")
    A, B = limit_coefficients(symbol, cubic)
    if B == 0:
        raise ConfigurationError("cubic coefficient must be nonzero")
    b = (3.0 * B * B / (32.0 * A * A)) ** (1.0 / 3.0)
    s = -4.0 * A * b * b / B
    energy = -24.0 / 5.0 * A * b * b
    return GroundState(abs(s), b, math.copysign(1.0, s), A, B, 8.0 * A * b * b, energy, symbol.name)


# --------------------------------------------------------------------------
# Scaling operator


def scaled_grid(grid: PeriodicGrid, q: float, exps: ScalingExponents) -> PeriodicGrid:
    """Grid on which ``S`` acts by relabelling nodes: period ``P q**-beta``."""
    return PeriodicGrid(grid.period * q ** (-exps.b), grid.size)


def scale_field(w: WaveField, q: float, exps: ScalingExponents) -> WaveField:
    """Exact ``S`` on a periodic field: same samples times ``q**alpha`` on the stretched grid."""
    return WaveField(scaled_grid(w.grid, q, exps), q**exps.a * w.samples)


def unscale_field(w: WaveField, q: float, exps: ScalingExponents) -> WaveField:
    """Exact inverse of :func:`scale_field`."""
    g = PeriodicGrid(w.grid.period * q**exps.b, w.grid.size)
    return WaveField(g, q ** (-exps.a) * w.samples)


def scale_lw(
    w,
    q: float,
    exps: ScalingExponents,
    target: PeriodicGrid,
    edge_tol: float = 1e-12,
) -> WaveField:
    """Sample ``q**alpha * w(q**beta x)`` on ``target``.

    ``w`` is a callable line profile or a :class:`WaveField` (evaluated by
    trigonometric interpolation; zero outside its period window).  Raises
    :class:`SupportError` when the result does not decay below ``edge_tol``
    at the target window edges.
    """
    if not q > 0:
        raise ContractViolation("q must be positive")
    xi = q**exps.b * target.nodes
    if isinstance(w, WaveField):
        half = 0.5 * w.grid.period
        vals = np.zeros_like(xi)
        inside = np.abs(xi) < half
        vals[inside] = sp.trig_interpolate(w.grid, w.samples, xi[inside])
    else:
        vals = np.asarray(w(xi), dtype=float)
    out = q**exps.a * vals
    edge = max(abs(out[0]), abs(out[1]), abs(out[-1]))
    if edge >= edge_tol:
        raise SupportError(f"target window too narrow: |S w| = {edge:.3g} at the edge")
    return WaveField(target, out)


def unscale_to(w: WaveField, q: float, exps: ScalingExponents, target: PeriodicGrid) -> WaveField:
    """``S^{-1} w`` sampled on ``target`` by trigonometric interpolation."""
    x = q ** (-exps.b) * target.nodes
    half = 0.5 * w.grid.period
    vals = np.zeros_like(x)
    inside = np.abs(x) < half
    vals[inside] = sp.trig_interpolate(w.grid, w.samples, x[inside])
    return WaveField(target, q ** (-exps.a) * vals)


def longwave_grid(profile: Callable, q: float, exps: ScalingExponents, width: float = 1.0, **kw) -> PeriodicGrid:
    """Auto-sized grid for ``S profile`` (period ``~ q**-beta``)."""
    scaled = lambda x: q**exps.a * profile(q**exps.b * x)
    return sp.auto_grid(scaled, width * q ** (-exps.b), **kw)


# --------------------------------------------------------------------------
# Convergence reports


@dataclass
class ConvergenceRow:
    q: float
    ratio: float
    defect: float
    N: int
    P: float


@dataclass
class ConvergenceReport:
    target: float
    exponent: float
    rows: list = field(default_factory=list)
    partial: bool = False
    note: str = ""

    @property
    def defects(self) -> list:
        return [abs(r.defect) for r in self.rows]

    @property
    def monotone(self) -> bool:
        d = self.defects
        return all(b < a for a, b in zip(d, d[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["q", "ratio", "defect", "N", "P"])
        for r in self.rows:
            wr.writerow([f"{r.q:.16e}", f"{r.ratio:.16e}", f"{r.defect:.16e}", r.N, f"{r.P:.16e}"])
        return buf.getvalue()

    def to_dict(self):
        return {
            "target": self.target,
            "exponent": self.exponent,
            "monotone": self.monotone,
            "partial": self.partial,
            "note": self.note,
            "rows": [r.__dict__ for r in self.rows],
        }


def longwave_identity_check(
    symbol: Symbol,
    profile,
    q_list: Sequence[float],
    make_functional: Callable | None = None,
    exps: ScalingExponents | None = None,
    limit_energy: float | None = None,
    grid_kw: dict | None = None,
) -> ConvergenceReport:
    """Measure ``(E(S w) + q m(0)) / q**(1 + (p-1) alpha)`` against ``E_lw(w)``.

    ``profile`` is a unit-mass :class:`GroundState`, a callable line profile
    or a periodic :class:`WaveField` (scaled exactly by relabelling).
    ``make_functional(op)`` builds the energy on each grid; it defaults to the
    Whitham--Boussinesq functional.
    """
    from .functionals import WBFunctional

    if any(b >= a for a, b in zip(q_list, q_list[1:])):
        raise ConfigurationError("q_list must be strictly decreasing")
    make_functional = make_functional or (lambda op: WBFunctional(op))
    exps = exps or exponents(symbol.j_star, 2)
    if limit_energy is None:
        if isinstance(profile, GroundState):
            limit_energy = profile.energy_lw
        elif isinstance(profile, WaveField):
            limit_energy = longwave_energy(symbol, profile)
        else:
            raise ConfigurationError("limit_energy required for a bare callable profile")
    order = float(exps.energy_order)
    report = ConvergenceReport(limit_energy, order)
    grid_kw = grid_kw or {}
    width = 1.0 / profile.b if isinstance(profile, GroundState) else 1.0
    for q in q_list:
        try:
            if isinstance(profile, WaveField):
                sw = scale_field(profile, q, exps)
            else:
                grid = longwave_grid(profile, q, exps, width=width, **grid_kw)
                sw = scale_lw(profile, q, exps, grid)
        except (ContractViolation, SupportError) as exc:
            report.partial = True
            report.note = f"stopped at q = {q:g}: {exc}"
            break
        F = make_functional(MultiplierOperator(symbol, sw.grid))
        E = F.energy(sw.samples)
        ratio = (E + q * symbol.m_at_zero) / q**order
        report.rows.append(ConvergenceRow(q, ratio, ratio - limit_energy, sw.grid.size, sw.grid.period))
    return report


@dataclass
class DistanceRow:
    q: float
    distance: float
    relative: float
    shift: int
    flag: str = ""


@dataclass
class DistanceReport:
    rows: list

    @property
    def decreasing_with_q(self) -> bool:
        """True when distances shrink as ``q`` decreases."""
        rows = sorted(self.rows, key=lambda r: r.q, reverse=True)
        d = [r.distance for r in rows]
        return all(b < a for a, b in zip(d, d[1:]))

    def to_dict(self):
        return {"decreasing_with_q": self.decreasing_with_q, "rows": [r.__dict__ for r in self.rows]}


def minimizer_distance(w: WaveField, q: float, gs: GroundState, exps: ScalingExponents | None = None):
    """Translation-minimized H^1 distance from ``S^{-1} w`` to the ground state.

    ``S^{-1}`` acts exactly by relabelling the grid, and the ground state is
    sampled on the relabelled nodes.
    """
    exps = exps or exponents(1, 2)
    v = unscale_field(w, q, exps)
    ref = WaveField(v.grid, gs.profile(v.grid.nodes))
    dist, shift = sp.aligned_distance(v, ref)
    return dist, shift, math.sqrt(sp.sobolev_sq(v.grid, ref.samples, 1.0))


def minimizer_distance_report(results, gs: GroundState, exps: ScalingExponents | None = None) -> DistanceReport:
    rows = []
    for res in results:
        dist, shift, ref_norm = minimizer_distance(res.w, res.q, gs, exps)
        s = res.w.samples
        flat = float(np.max(s) - np.min(s)) <= 1e-12 * max(1.0, float(np.max(np.abs(s))))
        flag = "non-solitary branch" if flat or dist > 0.5 * ref_norm else ""
        rows.append(DistanceRow(res.q, dist, dist / ref_norm, shift, flag))
    return DistanceReport(rows)
