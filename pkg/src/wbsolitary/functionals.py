"""Energy functionals, the constraint, the penalization and first variations.

Two backends share the quadrature and multiplier machinery:

* :class:`WBFunctional`: the Whitham--Boussinesq energy in the variable
  ``w = (u/c)(u/c - 2)``, ``E(w) = -1/2 <w, K w> - int N(w)`` with
  ``N(w) = 2 Psi(w) K w + 2 Psi(w) K Psi(w)``, ``Psi(w) = sqrt(1+w) - 1 - w/2``.
* :class:`ScalarFunctional`: ``E(u) = -1/2 <u, K u> - int Nt(u)`` for the
  scalar equation ``K u - c u + n(u) = 0``.

Nonlinear terms are evaluated on a 2x oversampled grid and projected back
onto the Nyquist-free modes of the working grid.  The projection is the exact
quadrature adjoint of the band-limited interpolation, so the returned
gradients are the exact gradients of the discrete energies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import spectral as sp
from .errors import AmplitudeError, ConfigurationError, ContractViolation, DomainError
from .spectral import MultiplierOperator, PeriodicGrid, WaveField

OVERSAMPLE = 2


def constraint_I(w: WaveField) -> float:
    """Half the squared L2 norm over one period."""
    return 0.5 * sp.inner(w.grid, w.samples, w.samples)


def psi(w):
    """``sqrt(1 + w) - 1 - w/2``, evaluated as ``-w**2 / (2 (sqrt(1+w) + 1)**2)``.

    The rewritten form has no subtraction, so it keeps full relative accuracy
    for small ``w``.
    """
    w = np.asarray(w, dtype=float)
    if np.any(w <= -1.0):
        raise DomainError("psi is defined only for w > -1")
    out = _psi_unchecked(w)
    return out if out.ndim else float(out)


def _psi_unchecked(w):
    d = np.sqrt(1.0 + w) + 1.0
    return -0.5 * (w / d) ** 2


@dataclass(frozen=True)
class Penalization:
    """Barrier ``eps * max(t - R**2, 0)**2 / ((2R)**2 - t)`` on ``t = ||w||_{H^1}**2``."""

    R: float
    strength: float = 1.0

    def __post_init__(self):
        if not (self.R > 0 and self.strength > 0):
            raise ConfigurationError("penalization needs R > 0 and strength > 0")

    @property
    def inner_radius_sq(self) -> float:
        return self.R**2

    @property
    def outer_radius_sq(self) -> float:
        return 4.0 * self.R**2

    def value(self, t: float) -> float:
        if t >= self.outer_radius_sq:
            return math.inf
        excess = t - self.inner_radius_sq
        if excess <= 0:
            return 0.0
        return self.strength * excess**2 / (self.outer_radius_sq - t)

    def derivative(self, t: float) -> float:
        if t >= self.outer_radius_sq:
            return math.inf
        excess = t - self.inner_radius_sq
        if excess <= 0:
            return 0.0
        gap = self.outer_radius_sq - t
        return self.strength * (2.0 * excess / gap + excess**2 / gap**2)

    def __call__(self, t):
        return self.value(t)


@dataclass
class EnergySplit:
    total: float
    quadratic: float
    nonlinear: float
    n_high: np.ndarray | None = None
    n_low: np.ndarray | None = None
    n_full: np.ndarray | None = None

    def __iter__(self):
        return iter((self.total, self.quadratic, self.nonlinear))


class _Backend:
    """Grid bookkeeping shared by both functionals."""

    operator: MultiplierOperator

    @property
    def grid(self) -> PeriodicGrid:
        return self.operator.grid

    @cached_property
    def fine_grid(self) -> PeriodicGrid:
        return self.grid.refined(OVERSAMPLE)

    @cached_property
    def fine_operator(self) -> MultiplierOperator:
        return self.operator.on(self.fine_grid)

    def _check_grid(self, w: WaveField):
        if w.grid != self.grid:
            raise ContractViolation("field grid differs from functional grid")

    def quadratic(self, samples: np.ndarray) -> float:
        return -0.5 * sp.inner(self.grid, samples, self.operator.apply(samples))


@dataclass(eq=False)
class WBFunctional(_Backend):
    operator: MultiplierOperator
    w_min: float = -0.5
    max_abs: float = 0.5
    # replacing Psi by 0 turns the functional into the pure quadratic -<w, Kw>/2
    include_nonlinear: bool = True

    def __post_init__(self):
        if not (-1.0 < self.w_min < 0.0):
            raise ConfigurationError("amplitude guard w_min must lie in (-1, 0)")
        if not (0.0 < self.max_abs < 1.0):
            raise ConfigurationError("smallness threshold must lie in (0, 1)")

    def guard(self, samples: np.ndarray) -> None:
        lo = float(np.min(samples))
        mx = float(np.max(np.abs(samples)))
        if not (lo > self.w_min and mx <= self.max_abs) or not np.isfinite(mx):
            raise AmplitudeError(mx, lo)

    def _fine_terms(self, samples):
        W = sp.upsample(samples, OVERSAMPLE)
        if np.min(W) <= -1.0:
            raise AmplitudeError(np.max(np.abs(W)), np.min(W), "interpolant leaves w > -1")
        Kf = self.fine_operator.apply
        KW = Kf(W)
        if not self.include_nonlinear:
            return W, KW, np.zeros_like(W), np.zeros_like(W)
        P = _psi_unchecked(W)
        return W, KW, P, Kf(P)

    def energy_split(self, samples: np.ndarray, diagnostics: bool = False) -> EnergySplit:
        self.guard(samples)
        quad = self.quadratic(samples)
        W, KW, P, KP = self._fine_terms(samples)
        N = 2.0 * P * KW + 2.0 * P * KP
        nonlin = -sp.integrate(self.fine_grid, N)
        split = EnergySplit(quad + nonlin, quad, nonlin)
        if diagnostics:
            nh = -0.25 * W * W * KW
            split.n_full, split.n_high, split.n_low = N, nh, N - nh
        return split

    def energy(self, samples: np.ndarray) -> float:
        return self.energy_split(samples).total

    def gradient(self, samples: np.ndarray) -> np.ndarray:
        self.guard(samples)
        W, KW, P, KP = self._fine_terms(samples)
        if not self.include_nonlinear:
            return -self.operator.apply(samples)
        root = np.sqrt(1.0 + W)
        G = -(KW + 2.0 * KP) / root
        return sp.project_down(G, self.grid.size)

    def el_residual(self, samples: np.ndarray, lam: float) -> np.ndarray:
        """``(2/sqrt(1+w)) K(sqrt(1+w) - 1) - lam w`` (zero at travelling waves)."""
        return -self.gradient(samples) - lam * samples


@dataclass(frozen=True)
class Nonlinearity:
    """Leading-order nonlinearity ``n(x) = c_p |x|**p`` or ``c_p x**p`` plus an optional remainder.

    ``form`` is ``"abs"`` for ``c_p |x|**p`` (any ``c_p != 0``) or ``"odd"`` for
    ``c_p x**p`` with odd integer ``p`` and ``c_p > 0``.  ``"auto"`` picks
    ``"odd"`` for odd integers and ``"abs"`` otherwise.
    """

    p: float = 2.0
    c_p: float = 1.0
    form: str = "auto"
    remainder: Callable | None = None
    remainder_antiderivative: Callable | None = None
    delta: float | None = None

    @property
    def resolved_form(self) -> str:
        if self.form != "auto":
            return self.form
        return "odd" if _is_odd_int(self.p) else "abs"

    def value(self, x):
        if self.resolved_form == "odd":
            out = self.c_p * x**self.p
        else:
            out = self.c_p * np.abs(x) ** self.p
        if self.remainder is not None:
            out = out + self.remainder(x)
        return out

    def antiderivative(self, x):
        if self.resolved_form == "odd":
            out = self.c_p * x ** (self.p + 1) / (self.p + 1)
        else:
            out = self.c_p * x * np.abs(x) ** self.p / (self.p + 1)
        if self.remainder_antiderivative is not None:
            out = out + self.remainder_antiderivative(x)
        return out


def _is_odd_int(p):
    return float(p).is_integer() and int(p) % 2 == 1


def check_nonlinearity(nl: Nonlinearity, j_star: int) -> None:
    upper = 4 * j_star + 1
    if not (2.0 <= nl.p < upper):
        raise ConfigurationError(f"power p = {nl.p} outside [2, {upper})")
    form = nl.resolved_form
    if form == "odd":
        if not _is_odd_int(nl.p):
            raise ConfigurationError(f"odd-power nonlinearity needs an odd integer p, got {nl.p}")
        if not nl.c_p > 0:
            raise ConfigurationError(f"odd-power nonlinearity needs c_p > 0, got {nl.c_p}")
    elif form == "abs":
        if nl.c_p == 0:
            raise ConfigurationError("c_p must be nonzero")
    else:
        raise ConfigurationError(f"unknown nonlinearity form {nl.form!r}")
    if nl.remainder is not None:
        if nl.remainder_antiderivative is None:
            raise ConfigurationError("remainder needs its antiderivative")
        if nl.delta is None or not nl.delta > 0:
            raise ConfigurationError("remainder needs an order gap delta > 0")


@dataclass(eq=False)
class ScalarFunctional(_Backend):
    operator: MultiplierOperator
    nonlinearity: Nonlinearity | None = field(default_factory=Nonlinearity)
    max_abs: float = 0.5

    def __post_init__(self):
        if self.nonlinearity is not None:
            check_nonlinearity(self.nonlinearity, self.operator.symbol.j_star)

    @classmethod
    def linear(cls, operator: MultiplierOperator) -> "ScalarFunctional":
        """The functional with ``n = 0`` (a linear eigenproblem on the sphere)."""
        return cls(operator, None)

    @property
    def p(self) -> float:
        return self.nonlinearity.p if self.nonlinearity is not None else 2.0

    def guard(self, samples: np.ndarray) -> None:
        mx = float(np.max(np.abs(samples)))
        if not (mx <= self.max_abs and np.isfinite(mx)):
            raise AmplitudeError(mx, float(np.min(samples)))

    def energy_split(self, samples: np.ndarray, diagnostics: bool = False) -> EnergySplit:
        self.guard(samples)
        quad = self.quadratic(samples)
        if self.nonlinearity is None:
            return EnergySplit(quad, quad, 0.0)
        U = sp.upsample(samples, OVERSAMPLE)
        nonlin = -sp.integrate(self.fine_grid, self.nonlinearity.antiderivative(U))
        return EnergySplit(quad + nonlin, quad, nonlin)

    def energy(self, samples: np.ndarray) -> float:
        return self.energy_split(samples).total

    def gradient(self, samples: np.ndarray) -> np.ndarray:
        self.guard(samples)
        g = -self.operator.apply(samples)
        if self.nonlinearity is not None:
            U = sp.upsample(samples, OVERSAMPLE)
            g = g - sp.project_down(self.nonlinearity.value(U), self.grid.size)
        return g

    def el_residual(self, samples: np.ndarray, nu: float) -> np.ndarray:
        """``K u + n(u) - nu u`` (zero at travelling waves of speed ``nu``)."""
        return -self.gradient(samples) - nu * samples


# --------------------------------------------------------------------------
# WaveField-level API


def energy_WB(F: WBFunctional, w: WaveField) -> EnergySplit:
    F._check_grid(w)
    return F.energy_split(w.samples, diagnostics=True)


def gradient_WB(F: WBFunctional, w: WaveField) -> WaveField:
    F._check_grid(w)
    return WaveField(w.grid, F.gradient(w.samples))


def energy_scalar(F: ScalarFunctional, u: WaveField) -> float:
    F._check_grid(u)
    return F.energy(u.samples)


def gradient_scalar(F: ScalarFunctional, u: WaveField) -> WaveField:
    F._check_grid(u)
    return WaveField(u.grid, F.gradient(u.samples))


def h1_sq(w: WaveField) -> float:
    return sp.sobolev_sq(w.grid, w.samples, 1.0)


def penalized_energy(F, pen: Penalization, w: WaveField) -> float:
    from .errors import AdmissibilityError

    F._check_grid(w)
    t = h1_sq(w)
    if t >= pen.outer_radius_sq:
        raise AdmissibilityError(
            f"||w||_H1^2 = {t:.6g} >= (2R)^2 = {pen.outer_radius_sq:.6g}; outside the admissible set",
            h1_sq=t,
        )
    return F.energy(w.samples) + pen.value(t)


def penalty_gradient(grid: PeriodicGrid, pen: Penalization, samples: np.ndarray, t: float) -> np.ndarray:
    """L2 gradient of ``pen(||w||_H1^2)``: ``pen'(t) * 2 (1 - d_xx) w``."""
    dp = pen.derivative(t)
    if dp == 0.0:
        return np.zeros_like(samples)
    return dp * 2.0 * sp.apply_diagonal(grid.sobolev_weights(1.0), samples)
