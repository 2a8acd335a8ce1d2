"""Constrained minimization of the penalized energy on ``{I(w) = q}``.

The descent direction is the H^1-preconditioned tangent gradient
``-(1 - d_xx)^{-1} (g - <g, w>/<w, w> w)``; iterates are pulled back to the
sphere by rescaling.  Step lengths come from Barzilai--Borwein estimates
safeguarded by Armijo backtracking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import spectral as sp
from .errors import (
    AdmissibilityError,
    BoundaryMinimizerError,
    ConfigurationError,
    ContractViolation,
    NonConvergenceError,
    NonWaveMultiplierError,
    ProjectionError,
)
from .functionals import Penalization
from .spectral import WaveField
from .symbols import require_valid

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class MinimizationConfig:
    q: float
    R: float | None = None
    penalty_strength: float = 1.0
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 50
    tol_residual: float = 1e-11
    max_iters: int = 20000
    ladder: tuple = ()
    q_ceiling: float | None = 0.05
    radius_factor: float = 50.0

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ConfigurationError("q must be positive")
        if self.q_ceiling is not None and self.q >= self.q_ceiling:
            raise ConfigurationError(f"q = {self.q} is not below q_ceiling = {self.q_ceiling}")
        if not self.tol_residual > 0:
            raise ConfigurationError("tol_residual must be positive")
        if self.R is not None and not self.R > 0:
            raise ConfigurationError("R must be positive")
        if not (0 < self.shrink < 1 and 0 < self.armijo < 1):
            raise ConfigurationError("line-search constants must lie in (0, 1)")
        if self.max_iters < 0:
            raise ConfigurationError("max_iters must be nonnegative")
        ladder = tuple(self.ladder)
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigurationError("continuation ladder must be strictly increasing")

    @property
    def radius(self) -> float:
        """Ball radius; ``R**2 = radius_factor * q`` unless given."""
        return self.R if self.R is not None else math.sqrt(self.radius_factor * self.q)

    def penalization(self) -> Penalization:
        return Penalization(self.radius, self.penalty_strength)


@dataclass
class MinimizerResult:
    w: WaveField
    lam: float
    energy: float
    iterations: int
    residual: float
    penalty_active: bool
    boundary_flag: bool
    q: float
    R: float
    h1_sq: float
    converged: bool = True
    shift: int = 0
    energy_history: list = field(default_factory=list, repr=False)
    residual_history: list = field(default_factory=list, repr=False)
    backend: str = "wb"

    @property
    def c(self) -> float:
        return math.sqrt(self.lam) if self.lam > 0 else float("nan")

    @property
    def grid(self):
        return self.w.grid

    def record(self, symbol_name: str = "") -> dict:
        return {
            "symbol": symbol_name,
            "backend": self.backend,
            "q": self.q,
            "R": self.R,
            "N": self.grid.size,
            "P": self.grid.period,
            "lambda": self.lam,
            "c": self.c,
            "energy": self.energy,
            "residual": self.residual,
            "iterations": self.iterations,
            "penalty_active": self.penalty_active,
            "boundary_flag": self.boundary_flag,
            "H1sq": self.h1_sq,
        }


def project_to_sphere(w: WaveField, q: float) -> WaveField:
    return WaveField(w.grid, _project(w.grid, w.samples, q))


def _project(grid, samples, q):
    cur = 0.5 * sp.inner(grid, samples, samples)
    if not cur > 0:
        raise ProjectionError("cannot project the zero field onto I = q")
    return samples * math.sqrt(q / cur)


def _tangent(grid, g, w):
    return g - (sp.inner(grid, g, w) / sp.inner(grid, w, w)) * w


def _penalized(F, pen, samples):
    """Penalized energy, its gradient, and ``t = ||w||_H1^2``."""
    grid = F.grid
    t = sp.sobolev_sq(grid, samples, 1.0)
    if t >= pen.outer_radius_sq:
        return math.inf, None, t
    E = F.energy(samples) + pen.value(t)
    g = F.gradient(samples)
    dp = pen.derivative(t)
    if dp:
        g = g + dp * 2.0 * sp.apply_diagonal(grid.sobolev_weights(1.0), samples)
    return E, g, t


def _penalized_energy_only(F, pen, samples):
    t = sp.sobolev_sq(F.grid, samples, 1.0)
    if t >= pen.outer_radius_sq:
        return math.inf
    try:
        return F.energy(samples) + pen.value(t)
    except (ValueError, FloatingPointError):
        return math.inf


def projected_gradient(F, pen: Penalization, w: WaveField, q: float | None = None) -> WaveField:
    """Tangent part of the penalized gradient, ``g - <g, w>/<w, w> w``."""
    F._check_grid(w)
    if q is not None:
        cur = 0.5 * sp.inner(w.grid, w.samples, w.samples)
        if abs(cur - q) > 1e-10 * q:
            raise ContractViolation(f"field has I = {cur:.12g}, expected {q:.12g}")
    _, g, _ = _penalized(F, pen, w.samples)
    if g is None:
        raise AdmissibilityError("field outside the admissible ball")
    return WaveField(w.grid, _tangent(w.grid, g, w.samples))


def _normalize_translation(samples, scale_tol=1e-12):
    """Circular shift putting the dominant extremum at x = 0 (node N/2)."""
    n = samples.size
    spread = float(np.max(samples) - np.min(samples))
    if spread <= scale_tol * max(1.0, float(np.max(np.abs(samples)))):
        return samples, 0
    lo, hi = float(np.min(samples)), float(np.max(samples))
    mean = float(np.mean(samples))
    # trough-shaped fields are centred at their minimum, crest-shaped ones at their maximum
    idx = int(np.argmin(samples)) if (mean - lo) >= (hi - mean) else int(np.argmax(samples))
    shift = n // 2 - idx
    return np.roll(samples, shift), shift


def minimize(
    F,
    config: MinimizationConfig,
    initial: WaveField,
    pen: Penalization | None = None,
    callback: Callable | None = None,
    raise_on_failure: bool = True,
) -> MinimizerResult:
    """Minimize the penalized energy of ``F`` on ``I = config.q`` from ``initial``.

    On success ``dE(w) + lam w = 0`` holds with H^1 residual at most
    ``config.tol_residual`` and ``lam = -<dE(w), w> / (2q)``.
    """
    require_valid(F.operator.symbol)
    F._check_grid(initial)
    grid = F.grid
    q = config.q
    pen = pen or config.penalization()
    backend = "scalar" if type(F).__name__.startswith("Scalar") else "wb"

    w = _project(grid, np.asarray(initial.samples, dtype=float), q)
    w = sp.zero_nyquist(w)
    w = _project(grid, w, q)
    t0 = sp.sobolev_sq(grid, w, 1.0)
    if t0 > pen.inner_radius_sq:
        raise AdmissibilityError(
            f"initial guess has ||w||_H1^2 = {t0:.6g} > R^2 = {pen.inner_radius_sq:.6g}", h1_sq=t0
        )
    F.guard(w)

    E, g, t = _penalized(F, pen, w)
    precond = 1.0 / grid.sobolev_weights(1.0)
    energies = [E]
    residuals = []
    step = config.initial_step
    prev_w = prev_gt = None
    it = 0
    converged = False
    while True:
        gt = _tangent(grid, g, w)
        res = math.sqrt(sp.sobolev_sq(grid, gt, 1.0))
        residuals.append(res)
        if callback is not None:
            callback(it, w, E, res)
        if res <= config.tol_residual:
            converged = True
            break
        if it >= config.max_iters:
            break
        d = -sp.apply_diagonal(precond, gt)
        slope = sp.inner(grid, gt, d)
        if prev_w is not None:
            s = w - prev_w
            y = gt - prev_gt
            sy = sp.inner(grid, s, y)
            if sy > 0:
                # BB2 step in the H^1 metric
                ypy = sp.inner(grid, y, sp.apply_diagonal(precond, y))
                step = sy / ypy if it % 2 else sp.h1_inner_samples(grid, s, s) / sy
            else:
                step = config.initial_step
        slack = 64 * _EPS * max(abs(E), np.finfo(float).tiny)
        tstep = step
        accepted = False
        for _ in range(config.max_backtracks + 1):
            trial = _project(grid, w + tstep * d, q)
            Et = _penalized_energy_only(F, pen, trial)
            if Et <= E + config.armijo * tstep * slope + slack:
                accepted = True
                break
            tstep *= config.shrink
        if not accepted:
            log.debug("line search failed at iteration %d (residual %.3g)", it, res)
            break
        prev_w, prev_gt = w, gt
        w = trial
        E, g, t = _penalized(F, pen, w)
        energies.append(E)
        it += 1

    lam = -sp.inner(grid, g, w) / (2.0 * q)
    t = sp.sobolev_sq(grid, w, 1.0)
    penalty_active = t > pen.inner_radius_sq
    shifted, shift = _normalize_translation(w)
    field_w = WaveField(grid, shifted)
    energy = F.energy(shifted)
    result = MinimizerResult(
        w=field_w,
        lam=lam,
        energy=energy,
        iterations=it,
        residual=residuals[-1],
        penalty_active=penalty_active,
        boundary_flag=abs(t - pen.inner_radius_sq) <= 0.01 * pen.inner_radius_sq or penalty_active,
        q=q,
        R=pen.R,
        h1_sq=t,
        converged=converged,
        shift=shift,
        energy_history=energies,
        residual_history=residuals,
        backend=backend,
    )
    if not raise_on_failure:
        return result
    if not converged:
        raise NonConvergenceError(
            f"no convergence after {it} iterations (residual {residuals[-1]:.3g} > {config.tol_residual:.3g})",
            history=residuals,
            result=result,
        )
    if penalty_active:
        raise BoundaryMinimizerError(
            f"boundary minimizer: ||w||_H1^2 = {t:.6g} > R^2 = {pen.inner_radius_sq:.6g}", result=result
        )
    if lam <= 0:
        raise NonWaveMultiplierError(lam, result=result)
    return result


@dataclass
class ContinuationOutcome:
    results: list
    failed_at: int | None = None
    diagnostic: str = ""

    @property
    def complete(self) -> bool:
        return self.failed_at is None

    def __iter__(self):
        return iter(self.results)

    def __len__(self):
        return len(self.results)

    def __getitem__(self, i):
        return self.results[i]


def continuation_run(
    F,
    ladder: Sequence[float],
    seed: WaveField,
    config: MinimizationConfig | None = None,
    exps=None,
) -> ContinuationOutcome:
    """Solve along an increasing ladder of ``q`` values, warm-starting each step.

    ``F`` is a functional (fixed grid) or a callable ``q -> functional``.  The
    seed for step ``i + 1`` is the previous minimizer under the long-wave
    rescaling ``r**alpha w(r**beta x)`` with ``r = q_{i+1} / q_i``.
    """
    from .longwave import exponents, scale_lw

    ladder = [float(q) for q in ladder]
    if not ladder:
        raise ConfigurationError("empty ladder")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigurationError("continuation ladder must be strictly increasing")
    factory = F if callable(F) and not hasattr(F, "energy") else (lambda q: F)
    base = config or MinimizationConfig(q=ladder[0])
    results = []
    current = seed
    for i, q in enumerate(ladder):
        Fq = factory(q)
        if exps is None:
            exps = exponents(Fq.operator.symbol.j_star, getattr(Fq, "p", 2))
        if i > 0:
            r = q / ladder[i - 1]
            prev = results[-1].w
            current = scale_lw(prev, r, exps, Fq.grid, edge_tol=np.inf)
        elif current.grid != Fq.grid:
            current = scale_lw(current, 1.0, exps, Fq.grid, edge_tol=np.inf)
        cfg = replace(base, q=q, ladder=())
        try:
            res = minimize(Fq, cfg, current, pen=Penalization(cfg.radius, cfg.penalty_strength))
        except (NonConvergenceError, BoundaryMinimizerError, NonWaveMultiplierError) as exc:
            return ContinuationOutcome(results, failed_at=i, diagnostic=f"q = {q:g}: {exc}")
        results.append(res)
    return ContinuationOutcome(results)
