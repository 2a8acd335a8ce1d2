"""Physical solitary waves ``(eta, u, c)`` from minimizers, with residual and regularity diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import spectral as sp
from .errors import DomainError, NonWaveMultiplierError
from .spectral import MultiplierOperator, PeriodicGrid, WaveField


@dataclass
class SolitaryWave:
    w: WaveField
    lam: float
    c: float
    u: WaveField
    eta: WaveField
    r2: float | None = None
    r3: float | None = None
    r4: float | None = None
    r_var: float | None = None
    spectral_decay: float | None = None

    @property
    def residuals(self):
        return (self.r2, self.r3, self.r4, self.r_var)

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "c": self.c,
            "residuals": {"r2": self.r2, "r3": self.r3, "r4": self.r4, "r_var": self.r_var},
            "decay_rate": self.spectral_decay,
            "eta_min": float(np.min(self.eta.samples)),
            "eta_max": float(np.max(self.eta.samples)),
            "u_max": float(np.max(self.u.samples)),
            "single_trough": single_trough(self.w.samples),
        }


def reconstruct(w: WaveField, lam: float, op: MultiplierOperator | None = None) -> SolitaryWave:
    """Invert ``w = (u/c)(u/c - 2)``: ``c = sqrt(lam)``, ``u = c - c sqrt(1 + w)``, ``eta = u (c - u/2)``.

    With ``op`` given, the system residuals are filled in as well.
    """
    if not lam > 0:
        raise NonWaveMultiplierError(lam)
    if np.any(w.samples <= -1.0):
        raise DomainError("1 + w must stay positive")
    c = math.sqrt(lam)
    root = np.sqrt(1.0 + w.samples)
    u = c - c * root
    eta = u * (c - 0.5 * u)
    wave = SolitaryWave(w, lam, c, WaveField(w.grid, u), WaveField(w.grid, eta))
    if op is not None:
        wave.r2, wave.r3, wave.r4 = system_residuals(wave, op)
        wave.r_var = variational_residual(w, lam, op)
    return wave


def single_trough(samples: np.ndarray, rel_floor: float = 1e-8) -> bool:
    """True if ``samples`` is nonpositive with one trough, ignoring wiggles below ``rel_floor * max|w|``.

    The floor absorbs the flat-tail noise left at convergence, whose size is
    set by the residual tolerance divided by the spectral gap ``lam - m(0)``.
    """
    s = np.asarray(samples, dtype=float)
    floor = rel_floor * float(np.max(np.abs(s)))
    i = int(np.argmin(s))
    ext = np.roll(s, -i)  # periodic: the trough moves to index 0
    half = ext.size // 2
    right = ext[: half + 1]
    left = np.concatenate([ext[:1], ext[:0:-1]])[: ext.size - half + 1]
    return bool(np.all(s <= floor) and np.all(np.diff(right) >= -floor) and np.all(np.diff(left) >= -floor))


def recover_w(wave: SolitaryWave) -> np.ndarray:
    v = wave.u.samples / wave.c
    return v * (v - 2.0)


def _l2(grid, v):
    return math.sqrt(sp.inner(grid, v, v))


def variational_residual(w: WaveField, lam: float, op: MultiplierOperator) -> float:
    """H^1 norm of ``(2/sqrt(1+w)) K(sqrt(1+w) - 1) - lam w`` (oversampled like the solver)."""
    from .functionals import WBFunctional

    F = WBFunctional(op, w_min=-0.999, max_abs=0.999)
    r = F.el_residual(w.samples, lam)
    return math.sqrt(sp.sobolev_sq(w.grid, r, 1.0))


def system_residuals(wave: SolitaryWave, op: MultiplierOperator) -> tuple[float, float, float]:
    """L2 residuals of ``c eta = K u + eta u``, ``c u = eta + u**2/2`` and ``K u = u (u - c)(u/2 - c)``."""
    g = wave.w.grid
    c, u, eta = wave.c, wave.u.samples, wave.eta.samples
    Ku = op.apply(u)
    r2 = _l2(g, c * eta - Ku - eta * u)
    r3 = _l2(g, c * u - eta - 0.5 * u * u)
    r4 = _l2(g, Ku - u * (u - c) * (0.5 * u - c))
    return r2, r3, r4


# --------------------------------------------------------------------------
# Constant branch


def constant_branch_lambda(w0: float, m_zero: float = 1.0) -> float:
    """Multiplier making the constant ``w0`` an exact critical point on any periodic grid."""
    if w0 == 0:
        return m_zero
    r = math.sqrt(1.0 + w0)
    return 2.0 * (r - 1.0) / (w0 * r) * m_zero


def constant_branch(grid: PeriodicGrid, w0: float, m_zero: float = 1.0) -> tuple[WaveField, float]:
    return WaveField.constant(grid, w0), constant_branch_lambda(w0, m_zero)


# --------------------------------------------------------------------------
# Regularity


@dataclass
class RegularityReport:
    sobolev_norms: dict
    decay_rate: float | None
    tail_fraction: float
    under_resolved: bool
    f_sobolev_norms: dict = field(default_factory=dict)
    f_decay_rate: float | None = None
    f_tail_fraction: float = 0.0
    tail_tol: float = 1e-12

    @property
    def certified(self) -> bool:
        return not self.under_resolved and all(math.isfinite(v) for v in self.sobolev_norms.values())

    def to_dict(self):
        return {
            "sobolev_norms": {str(k): v for k, v in self.sobolev_norms.items()},
            "decay_rate": self.decay_rate,
            "tail_fraction": self.tail_fraction,
            "under_resolved": self.under_resolved,
            "f_sobolev_norms": {str(k): v for k, v in self.f_sobolev_norms.items()},
            "f_decay_rate": self.f_decay_rate,
            "f_tail_fraction": self.f_tail_fraction,
        }


def spectral_decay_rate(w: WaveField) -> float | None:
    """Exponential decay rate of ``|w_hat|`` in wavenumber, fitted on ``N/16 <= |k| <= N/8``."""
    g = w.grid
    n = g.size
    idx = np.arange(n // 16, n // 8 + 1)
    mag = np.abs(w.rcoefficients[idx])
    ok = mag > 0
    if ok.sum() < 3:
        return None
    slope = np.polyfit(g.rwavenumbers[idx][ok], np.log(mag[ok]), 1)[0]
    return float(-slope)


def _norms(w: WaveField, kmax=6):
    return {k: sp.sobolev_norm(w, k) for k in range(1, kmax + 1)}


def regularity_report(w: WaveField, tail_tol: float = 1e-12) -> RegularityReport:
    tail = sp.tail_fraction(w.grid, w.samples)
    rep = RegularityReport(
        sobolev_norms=_norms(w),
        decay_rate=spectral_decay_rate(w),
        tail_fraction=tail,
        under_resolved=not tail < tail_tol,
        tail_tol=tail_tol,
    )
    if np.all(w.samples > -1.0):
        f = WaveField(w.grid, np.sqrt(1.0 + w.samples) - 1.0)
        rep.f_sobolev_norms = _norms(f)
        rep.f_decay_rate = spectral_decay_rate(f)
        rep.f_tail_fraction = sp.tail_fraction(f.grid, f.samples)
        rep.under_resolved = rep.under_resolved or not rep.f_tail_fraction < tail_tol
    return rep
