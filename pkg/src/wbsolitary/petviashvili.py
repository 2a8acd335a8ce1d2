"""Petviashvili fixed-point iteration, used as an independent check on minimizers.

For the Whitham--Boussinesq equation the unknown is ``f = sqrt(1 + w) - 1``,
which satisfies ``(2 lam - 2K) f = -lam (3 f**2 + f**3)``.  The scalar
equation is written as ``(nu - K) u = n(u)``.  Both are iterated as

    f <- M**gamma L^{-1} N(f),    M = <L f, f> / <N(f), f>,

at fixed speed; the mass ``I = q`` is then matched by a bracketing root
search on the speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import spectral as sp
from .errors import NonConvergenceError, WBError
from .spectral import MultiplierOperator, WaveField, aligned_distance  # noqa: F401


@dataclass
class PetviashviliResult:
    field: WaveField
    speed: float
    iterations: int
    stabilizer: float
    increment: float


def _products(samples, fn):
    """Evaluate a pointwise polynomial on the 2x grid and project back."""
    fine = sp.upsample(samples, 2)
    return sp.project_down(fn(fine), samples.size)


def iterate(
    linear_diag: np.ndarray,
    nonlinear,
    seed: np.ndarray,
    gamma: float,
    tol: float = 1e-15,
    max_iter: int = 2000,
):
    """Generic Petviashvili loop on the real-FFT half spectrum ``linear_diag``."""
    u = np.array(seed, dtype=float)
    n = u.size
    M = float("nan")
    for it in range(1, max_iter + 1):
        Nu = nonlinear(u)
        uh = np.fft.rfft(u)
        Nh = np.fft.rfft(Nu)
        num = _pair_sum(linear_diag * np.abs(uh) ** 2)
        den = _pair_sum((Nh * np.conj(uh)).real)
        if den == 0 or not np.isfinite(den):
            raise NonConvergenceError("Petviashvili stabilizer undefined (N(u) orthogonal to u)")
        M = num / den
        new_h = M**gamma * Nh / linear_diag
        new_h[-1] = 0.0
        new = np.fft.irfft(new_h, n=n)
        inc = float(np.max(np.abs(new - u)))
        u = new
        scale = max(float(np.max(np.abs(u))), np.finfo(float).tiny)
        if inc <= tol * scale and abs(M - 1.0) <= 1e-13:
            return u, it, M, inc
    raise NonConvergenceError(
        f"Petviashvili did not converge in {max_iter} iterations (M = {M:.16g}, increment {inc:.3g})"
    )


def _pair_sum(v):
    n2 = v.size - 1
    return float(v[0] + v[n2] + 2.0 * np.sum(v[1:n2]))


def wb_at_speed(op: MultiplierOperator, lam: float, seed_w: np.ndarray, **kw) -> PetviashviliResult:
    if lam <= op.symbol.m_at_zero:
        raise WBError("fixed-speed iteration needs lam > m(0)")
    L = 2.0 * lam - 2.0 * op.rdiagonal
    seed_f = np.sqrt(1.0 + seed_w) - 1.0
    nonlin = lambda f: _products(f, lambda F: -lam * (3.0 * F * F + F**3))
    f, it, M, inc = iterate(L, nonlin, seed_f, 2.0, **kw)
    w = f * f + 2.0 * f
    return PetviashviliResult(WaveField(op.grid, w), lam, it, M, inc)


def scalar_at_speed(op: MultiplierOperator, nonlinearity, nu: float, seed: np.ndarray, **kw) -> PetviashviliResult:
    if nu <= op.symbol.m_at_zero:
        raise WBError("fixed-speed iteration needs nu > m(0)")
    L = nu - op.rdiagonal
    nonlin = lambda u: _products(u, nonlinearity.value)
    gamma = nonlinearity.p / (nonlinearity.p - 1.0)
    u, it, M, inc = iterate(L, nonlin, seed, gamma, **kw)
    return PetviashviliResult(WaveField(op.grid, u), nu, it, M, inc)


def _mass(grid, samples):
    return 0.5 * sp.inner(grid, samples, samples)


def solve_at_mass(solve_at_speed, grid, q: float, speed_guess: float, m_zero: float, seed: np.ndarray, xtol=1e-15):
    """Find the speed whose fixed-speed solution has ``I = q``."""
    state = {"seed": np.array(seed, dtype=float)}

    def excess(speed):
        res = solve_at_speed(speed, state["seed"])
        state["seed"] = res.field.samples
        state["last"] = res
        return _mass(grid, res.field.samples) / q - 1.0

    gap = speed_guess - m_zero
    lo, hi = m_zero + 0.5 * gap, m_zero + 2.0 * gap
    f_lo, f_hi = excess(lo), excess(hi)
    tries = 0
    while f_lo > 0 and tries < 20:
        lo = m_zero + 0.5 * (lo - m_zero)
        f_lo = excess(lo)
        tries += 1
    while f_hi < 0 and tries < 40:
        hi = m_zero + 2.0 * (hi - m_zero)
        f_hi = excess(hi)
        tries += 1
    if f_lo > 0 or f_hi < 0:
        raise NonConvergenceError("could not bracket the speed for the requested mass")
    speed = brentq(excess, lo, hi, xtol=xtol * max(1.0, abs(speed_guess)), rtol=4 * np.finfo(float).eps, maxiter=200)
    res = solve_at_speed(speed, state["seed"])
    return res


def wb_oracle(op: MultiplierOperator, q: float, speed_guess: float, seed_w: np.ndarray) -> PetviashviliResult:
    """Travelling wave of the WB equation with ``I(w) = q`` by Petviashvili + root search."""
    return solve_at_mass(
        lambda lam, s: wb_at_speed(op, lam, s),
        op.grid,
        q,
        speed_guess,
        op.symbol.m_at_zero,
        seed_w,
    )


def scalar_oracle(op: MultiplierOperator, nonlinearity, q: float, speed_guess: float, seed: np.ndarray) -> PetviashviliResult:
    return solve_at_mass(
        lambda nu, s: scalar_at_speed(op, nonlinearity, nu, s),
        op.grid,
        q,
        speed_guess,
        op.symbol.m_at_zero,
        seed,
    )
