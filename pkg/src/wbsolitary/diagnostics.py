"""Validation suites: gradient consistency, periodization limit, kernel decay, symbol checks.

Each suite returns a small report with ``passed`` and ``to_dict()`` so the
command-line front end can bundle them into one JSON document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import spectral as sp
from .functionals import Nonlinearity, ScalarFunctional, WBFunctional
from .spectral import MultiplierOperator, PeriodicGrid
from .symbols import Symbol, validate_symbol

EPS = np.finfo(float).eps


def smooth_random_field(grid: PeriodicGrid, rng: np.random.Generator, amplitude: float = 0.2, modes: int = 12):
    """Random trigonometric polynomial with decaying spectrum, scaled to ``max|w| = amplitude``."""
    x = grid.nodes
    w = np.zeros_like(x)
    base = 2.0 * np.pi / grid.period
    for k in range(modes + 1):
        a, b = rng.standard_normal(2) / (1.0 + k) ** 2
        w += a * np.cos(k * base * x) + b * np.sin(k * base * x)
    return amplitude * w / np.max(np.abs(w))


# --------------------------------------------------------------------------
# Gradient consistency


@dataclass
class GradientCheck:
    backend: str
    errors: list
    tol: float
    eps: float

    @property
    def worst(self) -> float:
        return max(self.errors)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tol

    def to_dict(self):
        return {"backend": self.backend, "pairs": len(self.errors), "worst": self.worst, "tol": self.tol, "passed": self.passed}


def gradient_check(F, rng: np.random.Generator, pairs: int = 20, eps: float = 1e-5, tol: float = 1e-6) -> GradientCheck:
    """Compare ``<dE(w), h>`` with central differences over random admissible pairs.

    The error per pair is ``|<dE, h> - fd| / (1 + |<dE, h>|)``.
    """
    g = F.grid
    errs = []
    for _ in range(pairs):
        w = smooth_random_field(g, rng, amplitude=0.2)
        h = smooth_random_field(g, rng, amplitude=1.0)
        exact = sp.inner(g, F.gradient(w), h)
        fd = (F.energy(w + eps * h) - F.energy(w - eps * h)) / (2.0 * eps)
        errs.append(abs(exact - fd) / (1.0 + abs(exact)))
    backend = "wb" if isinstance(F, WBFunctional) else "scalar"
    return GradientCheck(backend, errs, tol, eps)


def default_functionals(symbol: Symbol, grid: PeriodicGrid | None = None):
    grid = grid or PeriodicGrid(2.0 * np.pi * 4, 128)
    op = MultiplierOperator(symbol, grid)
    return WBFunctional(op), ScalarFunctional(op, Nonlinearity())


# --------------------------------------------------------------------------
# Periodization limit


@dataclass
class PeriodizationRow:
    P: float
    N: int
    energy_defect: float
    gradient_defect: float


@dataclass
class PeriodizationReport:
    rows: list
    reference_P: float
    reference_N: int
    energy_floor: float
    gradient_floor: float
    final_tol: float

    @staticmethod
    def _monotone(values, floor):
        # strictly decreasing while above the roundoff floor, then pinned under it
        for a, b in zip(values, values[1:]):
            if a <= floor:
                if b > floor:
                    return False
            elif not b < a:
                return False
        return True

    @property
    def energy_monotone(self) -> bool:
        return self._monotone([r.energy_defect for r in self.rows], self.energy_floor)

    @property
    def gradient_monotone(self) -> bool:
        return self._monotone([r.gradient_defect for r in self.rows], self.gradient_floor)

    @property
    def final_ok(self) -> bool:
        last = self.rows[-1]
        return last.energy_defect <= self.final_tol and last.gradient_defect <= self.final_tol

    @property
    def passed(self) -> bool:
        return self.energy_monotone and self.gradient_monotone and self.final_ok

    def to_dict(self):
        return {
            "reference": {"P": self.reference_P, "N": self.reference_N},
            "rows": [r.__dict__ for r in self.rows],
            "energy_monotone": self.energy_monotone,
            "gradient_monotone": self.gradient_monotone,
            "final_ok": self.final_ok,
            "passed": self.passed,
        }


def periodization_limit(
    symbol: Symbol,
    periods: Sequence[float] = (32, 64, 128, 256),
    profile: sp.LineProfile | None = None,
    spacing: float = 1.0 / 16.0,
    reference_factor: int = 8,
    final_tol: float = 1e-10,
) -> PeriodizationReport:
    """``|E - E_P|`` and ``||dE - dE_P||_{H^1}`` for a fixed bump as the period grows.

    The line quantities are taken from a period ``reference_factor * max(P)``
    at the same node spacing, so every window is a node-aligned sub-array of
    the reference grid and only the periodic images differ.
    """
    profile = profile or sp.bump(0.1, 12.0)
    periods = sorted(float(p) for p in periods)

    def size(P):
        n = P / spacing
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"period {P} is not a multiple of the spacing {spacing}")
        return int(round(n))

    P_ref = reference_factor * periods[-1]
    g_ref = PeriodicGrid(P_ref, size(P_ref))
    F_ref = WBFunctional(MultiplierOperator(symbol, g_ref))
    w_ref = sp.periodize(profile, g_ref).samples
    E_ref = F_ref.energy(w_ref)
    G_ref = F_ref.gradient(w_ref)
    rows = []
    for P in periods:
        g = PeriodicGrid(P, size(P))
        F = WBFunctional(MultiplierOperator(symbol, g))
        w = sp.periodize(profile, g).samples
        start = (g_ref.size - g.size) // 2
        diff = F.gradient(w) - G_ref[start : start + g.size]
        rows.append(
            PeriodizationRow(P, g.size, abs(F.energy(w) - E_ref), math.sqrt(sp.sobolev_sq(g, diff, 1.0)))
        )
    g_norm = math.sqrt(sp.sobolev_sq(g_ref, G_ref, 1.0))
    return PeriodizationReport(
        rows,
        P_ref,
        g_ref.size,
        energy_floor=64 * EPS * max(abs(E_ref), 1e-300),
        gradient_floor=1e3 * EPS * g_norm,
        final_tol=final_tol,
    )


# --------------------------------------------------------------------------
# Kernel decay and symbol checks


def kernel_decay_suite(symbol: Symbol, l: int = 3, period: float = 256.0, size: int = 4096):
    """Off-support decay of ``K f`` for a unit bump centred in a wide window."""
    g = PeriodicGrid(period, size)
    f = sp.periodize(sp.bump(1.0, 1.0), g)
    return sp.kernel_decay_report(MultiplierOperator(symbol, g), f, l=l, support=(-1.0, 1.0))


@dataclass
class SuiteBundle:
    results: dict = field(default_factory=dict)

    def add(self, name: str, passed: bool, payload: dict):
        self.results[name] = {"passed": bool(passed), **payload}

    @property
    def failures(self) -> list:
        return [k for k, v in self.results.items() if not v["passed"]]

    @property
    def passed(self) -> bool:
        return not self.failures


SUITES = ("symbol", "kernel", "periodization", "gradient")


def run_suites(
    symbol: Symbol,
    suites: Sequence[str] = SUITES,
    strict: bool = True,
    periods: Sequence[float] = (32, 64, 128, 256),
    seed: int = 0,
) -> SuiteBundle:
    bundle = SuiteBundle()
    for name in suites:
        if name == "symbol":
            rep = validate_symbol(symbol, strict=strict)
            bundle.add(name, rep.valid, rep.to_dict())
        elif name == "kernel":
            fit = kernel_decay_suite(symbol)
            bundle.add(name, fit.passed, fit.to_dict())
        elif name == "periodization":
            rep = periodization_limit(symbol, periods)
            bundle.add(name, rep.passed, rep.to_dict())
        elif name == "gradient":
            rng = np.random.default_rng(seed)
            checks = [gradient_check(F, rng) for F in default_functionals(symbol)]
            bundle.add(name, all(c.passed for c in checks), {"checks": [c.to_dict() for c in checks]})
        else:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return bundle
