"""Periodic grids, normalized Fourier data, multiplier operators and norms.

Fourier coefficients follow the unitary convention on ``[-P/2, P/2)``::

    w(x) = P**-0.5 * sum_k what(k) exp(2 pi i k x / P)

so ``sum |what|**2`` equals the L2 norm squared over one period and the
``H^s_P`` norm weights mode ``k`` by ``(1 + (2 pi k / P)**2)**s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import ContractViolation, SupportError
from .symbols import Symbol

ROUNDTRIP_RTOL = 1e-13
SUPPORT_FLOOR = 1e-13


@dataclass(frozen=True)
class PeriodicGrid:
    period: float
    size: int

    def __post_init__(self):
        if not self.period > 0:
            raise ContractViolation(f"period must be positive, got {self.period}")
        n = int(self.size)
        if n < 4 or n & (n - 1):
            raise ContractViolation(f"grid size must be a power of two >= 4, got {self.size}")

    @property
    def spacing(self) -> float:
        return self.period / self.size

    @cached_property
    def nodes(self) -> np.ndarray:
        return -0.5 * self.period + self.spacing * np.arange(self.size)

    @cached_property
    def indices(self) -> np.ndarray:
        """Integer mode indices in FFT order (Nyquist appears once, as ``-N/2``)."""
        return np.fft.fftfreq(self.size, d=1.0 / self.size).astype(int)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * self.indices / self.period

    @cached_property
    def rwavenumbers(self) -> np.ndarray:
        """Nonnegative wavenumbers matching ``numpy.fft.rfft`` output."""
        return 2.0 * np.pi * np.arange(self.size // 2 + 1) / self.period

    @cached_property
    def _phase(self) -> np.ndarray:
        # nodes start at -P/2, so the DFT picks up (-1)**k relative to x = 0
        return np.where(self.indices % 2 == 0, 1.0, -1.0)

    def sobolev_weights(self, s: float) -> np.ndarray:
        return (1.0 + self.rwavenumbers**2) ** s

    def refined(self, factor: int = 2) -> "PeriodicGrid":
        return PeriodicGrid(self.period, self.size * factor)

    def describe(self) -> dict:
        return {"N": self.size, "P": self.period}


@dataclass(frozen=True, eq=False)
class WaveField:
    """Real periodic samples on a grid with their normalized Fourier data."""

    grid: PeriodicGrid
    samples: np.ndarray

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float, copy=True)
        if arr.shape != (self.grid.size,):
            raise ContractViolation(
                f"expected {self.grid.size} samples, got array of shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func: Callable) -> "WaveField":
        return cls(grid, func(grid.nodes))

    @classmethod
    def constant(cls, grid: PeriodicGrid, value: float) -> "WaveField":
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def from_coefficients(cls, grid: PeriodicGrid, coeffs) -> "WaveField":
        coeffs = np.asarray(coeffs, dtype=complex)
        raw = coeffs * grid._phase * grid.size / math.sqrt(grid.period)
        vals = np.fft.ifft(raw)
        if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
            raise ContractViolation("coefficients are not conjugate-symmetric")
        return cls(grid, vals.real)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Normalized coefficients in FFT order (see module docstring)."""
        g = self.grid
        return np.fft.fft(self.samples) * g._phase * (math.sqrt(g.period) / g.size)

    @cached_property
    def rcoefficients(self) -> np.ndarray:
        """Nonnegative-index half of :attr:`coefficients` (magnitudes are phase free)."""
        g = self.grid
        return np.fft.rfft(self.samples) * (math.sqrt(g.period) / g.size)

    def with_samples(self, samples) -> "WaveField":
        return WaveField(self.grid, samples)

    def __add__(self, other):
        return self.with_samples(self.samples + _samples_on(self.grid, other))

    def __sub__(self, other):
        return self.with_samples(self.samples - _samples_on(self.grid, other))

    def __mul__(self, scalar):
        return self.with_samples(self.samples * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_samples(-self.samples)


def _samples_on(grid, other):
    if isinstance(other, WaveField):
        if other.grid != grid:
            raise ContractViolation("grid mismatch")
        return other.samples
    return np.asarray(other, dtype=float)


def check_consistency(w: WaveField) -> float:
    """Relative round-trip error of samples -> coefficients -> samples."""
    back = WaveField.from_coefficients(w.grid, w.coefficients).samples
    scale = max(np.max(np.abs(w.samples)), np.finfo(float).tiny)
    return float(np.max(np.abs(back - w.samples)) / scale)


# --------------------------------------------------------------------------
# Array-level kernels (shared by both functional backends)


def integrate(grid: PeriodicGrid, values: np.ndarray) -> float:
    """Trapezoidal rule over one period (exact for trigonometric polynomials of degree < N)."""
    return grid.spacing * float(np.sum(values))


def inner(grid: PeriodicGrid, a: np.ndarray, b: np.ndarray) -> float:
    return grid.spacing * float(np.dot(a, b))


def sobolev_sq(grid: PeriodicGrid, samples: np.ndarray, s: float) -> float:
    """Squared H^s_P norm of real samples, computed from the half spectrum."""
    c = np.fft.rfft(samples)
    w = grid.sobolev_weights(s) * np.abs(c) ** 2
    n = grid.size
    total = w[0] + w[n // 2] + 2.0 * np.sum(w[1 : n // 2])
    return float(total) * grid.period / n**2


def apply_diagonal(diag_r: np.ndarray, samples: np.ndarray) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(samples) * diag_r, n=samples.shape[-1])


def derivative(grid: PeriodicGrid, samples: np.ndarray, order: int = 1) -> np.ndarray:
    c = np.fft.rfft(samples) * (1j * grid.rwavenumbers) ** order
    if order % 2:
        c[-1] = 0.0
    return np.fft.irfft(c, n=grid.size)


def zero_nyquist(samples: np.ndarray) -> np.ndarray:
    c = np.fft.rfft(samples)
    c[-1] = 0.0
    return np.fft.irfft(c, n=samples.shape[-1])


def upsample(samples: np.ndarray, factor: int = 2) -> np.ndarray:
    """Band-limited interpolation onto a grid ``factor`` times finer."""
    n = samples.shape[-1]
    c = np.fft.rfft(samples)
    fine = np.zeros(n * factor // 2 + 1, dtype=complex)
    fine[: n // 2] = c[: n // 2]
    # the coarse Nyquist mode becomes a genuine +-N/2 pair on the fine grid
    fine[n // 2] = 0.5 * c[n // 2]
    return np.fft.irfft(fine, n=n * factor) * factor


def project_down(fine_samples: np.ndarray, n: int) -> np.ndarray:
    """L2-orthogonal projection of fine samples onto modes ``|k| < n/2``.

    This is the quadrature adjoint of :func:`upsample` on Nyquist-free fields.
    """
    m = fine_samples.shape[-1]
    c = np.fft.rfft(fine_samples)
    coarse = np.zeros(n // 2 + 1, dtype=complex)
    coarse[: n // 2] = c[: n // 2]
    return np.fft.irfft(coarse, n=n) * (n / m)


def tail_fraction(grid: PeriodicGrid, samples: np.ndarray, cutoff_index: int | None = None) -> float:
    """Share of spectral mass carried by modes with ``|k| > cutoff_index`` (default N/4)."""
    n = grid.size
    cut = n // 4 if cutoff_index is None else int(cutoff_index)
    p = np.abs(np.fft.rfft(samples)) ** 2
    p[1 : n // 2] *= 2.0
    total = float(np.sum(p))
    if total == 0.0:
        return 0.0
    return float(np.sum(p[cut + 1 :])) / total


def shift_samples(grid: PeriodicGrid, samples: np.ndarray, a: float) -> np.ndarray:
    """Exact spectral translation ``x -> w(x - a)``."""
    c = np.fft.rfft(samples) * np.exp(-1j * grid.rwavenumbers * a)
    if grid.size % 2 == 0:
        c[-1] = c[-1].real
    return np.fft.irfft(c, n=grid.size)


def trig_interpolate(grid: PeriodicGrid, samples: np.ndarray, x) -> np.ndarray:
    """Evaluate the band-limited interpolant of ``samples`` at arbitrary points."""
    x = np.asarray(x, dtype=float)
    n = grid.size
    c = np.fft.rfft(samples) / n
    c[1 : n // 2] *= 2.0
    kap = grid.rwavenumbers
    out = np.zeros(x.shape)
    phase_x = x + 0.5 * grid.period
    chunk = 4096
    flat = phase_x.ravel()
    res = np.empty(flat.shape)
    for start in range(0, flat.size, chunk):
        xs = flat[start : start + chunk]
        e = np.exp(1j * np.outer(xs, kap))
        res[start : start + chunk] = (e @ c).real
    out = res.reshape(x.shape)
    return out


# --------------------------------------------------------------------------
# Public operations


@dataclass(frozen=True, eq=False)
class MultiplierOperator:
    """The operator ``K`` with symbol ``symbol`` restricted to ``grid``."""

    symbol: Symbol
    grid: PeriodicGrid

    @cached_property
    def diagonal(self) -> np.ndarray:
        return np.asarray(self.symbol(self.grid.wavenumbers), dtype=float)

    @cached_property
    def rdiagonal(self) -> np.ndarray:
        return np.asarray(self.symbol(self.grid.rwavenumbers), dtype=float)

    def apply(self, samples: np.ndarray) -> np.ndarray:
        return apply_diagonal(self.rdiagonal, samples)

    def on(self, grid: PeriodicGrid) -> "MultiplierOperator":
        return self if grid == self.grid else MultiplierOperator(self.symbol, grid)


def apply_K(op: MultiplierOperator, w: WaveField) -> WaveField:
    if op.grid != w.grid:
        raise ContractViolation("operator and field live on different grids")
    return WaveField(w.grid, op.apply(w.samples))


def sobolev_norm(w: WaveField, s: float) -> float:
    if s < 0:
        raise ContractViolation(f"Sobolev index must be nonnegative, got {s}")
    return math.sqrt(sobolev_sq(w.grid, w.samples, s))


def l2_inner(f: WaveField, g: WaveField) -> float:
    if f.grid != g.grid:
        raise ContractViolation("grid mismatch")
    return inner(f.grid, f.samples, g.samples)


def h1_inner_samples(grid: PeriodicGrid, a: np.ndarray, b: np.ndarray) -> float:
    ca, cb = np.fft.rfft(a), np.fft.rfft(b)
    w = grid.sobolev_weights(1.0) * (ca * np.conj(cb)).real
    n = grid.size
    return float(w[0] + w[n // 2] + 2.0 * np.sum(w[1 : n // 2])) * grid.period / n**2


# --------------------------------------------------------------------------
# Periodization


@dataclass(frozen=True)
class LineProfile:
    """A compactly supported function on the line: ``func`` vanishes for ``|x - center| >= radius``."""

    func: Callable
    radius: float
    center: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x - self.center) < self.radius
        out = np.zeros_like(x)
        out[inside] = self.func(x[inside])
        return out


def bump(amplitude: float = 1.0, radius: float = 1.0, center: float = 0.0) -> LineProfile:
    """The standard C-infinity bump ``A exp(1 - 1/(1 - r**2))`` of given support radius."""

    def f(x):
        r = (x - center) / radius
        return amplitude * np.exp(1.0 - 1.0 / (1.0 - r * r))

    return LineProfile(f, radius, center)


def standoff(profile: LineProfile, period: float) -> float:
    lo = profile.center - profile.radius
    hi = profile.center + profile.radius
    return float(min(lo + 0.5 * period, 0.5 * period - hi))


def periodize(w_line: LineProfile, grid: PeriodicGrid) -> WaveField:
    """Wrap a compactly supported line profile onto the periodic grid.

    The support must keep a distance of at least ``P**0.25 / 2`` from the
    window edges ``+-P/2``; then only the ``j = 0`` image is nonzero on the
    window and the sampled field equals the line profile there.
    """
    P = grid.period
    need = 0.5 * P**0.25
    gap = standoff(w_line, P)
    if gap < need:
        raise SupportError(
            f"support standoff {gap:.6g} below required {need:.6g} for P = {P}", standoff=gap
        )
    return WaveField(grid, w_line(grid.nodes))


# --------------------------------------------------------------------------
# Off-support decay of K f


@dataclass
class DecayFit:
    order: int
    slope: float | None
    constant: float | None
    passed: bool
    below_floor: bool
    distances: np.ndarray
    values: np.ndarray

    def to_dict(self):
        return {
            "l": self.order,
            "slope": self.slope,
            "C_l": self.constant,
            "passed": self.passed,
            "below_floor": self.below_floor,
        }


def kernel_decay_report(
    op: MultiplierOperator,
    f: WaveField,
    l: int = 3,
    support: tuple | None = None,
    floor: float = 1e-14,
    d_min: float = 2.0,
    d_max: float | None = None,
) -> DecayFit:
    """Fit the log-log slope of ``|K f|`` against distance from ``supp f``.

    ``support`` is the interval ``(a, b)`` carrying ``f``; by default it is
    the hull of samples above ``SUPPORT_FLOOR``.  Points are taken at
    distances ``d`` in ``[d_min, P/4]`` on either side; values under
    ``floor`` are discarded, and if nothing remains the report is
    "decay below floor", which counts as a pass.
    """
    if op.grid != f.grid:
        raise ContractViolation("operator and field live on different grids")
    g = f.grid
    x = g.nodes
    if support is None:
        idx = np.nonzero(np.abs(f.samples) > SUPPORT_FLOOR)[0]
        if idx.size == 0:
            raise ContractViolation("field vanishes identically")
        support = (x[idx[0]], x[idx[-1]])
    a, b = support
    if d_max is None:
        d_max = g.period / 4
    kf = op.apply(f.samples)
    dist = np.maximum(a - x, x - b)
    sel = (dist >= d_min) & (dist <= d_max)
    d = dist[sel]
    vals = np.abs(kf[sel])
    keep = vals > floor
    norm = math.sqrt(inner(g, f.samples, f.samples))
    if keep.sum() < 3:
        return DecayFit(l, None, None, True, True, d, vals)
    ld, lv = np.log(d[keep]), np.log(vals[keep])
    slope = float(np.polyfit(ld, lv, 1)[0])
    c_l = float(np.max(vals[keep] * d[keep] ** l) / norm) if norm > 0 else None
    return DecayFit(l, slope, c_l, slope <= -l, False, d, vals)


def auto_grid(
    profile: Callable,
    width: float,
    min_period: float = 64.0,
    width_factor: float = 60.0,
    n_start: int = 64,
    n_max: int = 1 << 16,
    tail_tol: float = 1e-12,
) -> PeriodicGrid:
    """Pick ``P = max(min_period, width_factor * width)`` and double ``N`` until resolved.

    ``profile`` maps node arrays to samples; ``N`` doubles until the spectral
    mass beyond ``|k| > N/4`` drops under ``tail_tol`` of the total.
    """
    period = max(min_period, width_factor * width)
    n = n_start
    while n <= n_max:
        grid = PeriodicGrid(period, n)
        if tail_fraction(grid, profile(grid.nodes)) < tail_tol:
            return grid
        n *= 2
    raise ContractViolation(f"profile not resolved with N <= {n_max} on P = {period}")


def aligned_distance(a: WaveField, b: WaveField, s: float = 1.0) -> tuple[float, int]:
    """``min_shift ||a - roll(b, shift)||_{H^s}`` over grid translations."""
    if a.grid != b.grid:
        raise ContractViolation("grid mismatch")
    g = a.grid
    ah, bh = np.fft.fft(a.samples), np.fft.fft(b.samples)
    wts = (1.0 + g.wavenumbers**2) ** s
    # corr[m] is proportional to <a, roll(b, m)> in the H^s inner product
    corr = np.fft.ifft(wts * ah * np.conj(bh)).real
    shift = int(np.argmax(corr))
    dist = math.sqrt(sobolev_sq(g, a.samples - np.roll(b.samples, shift), s))
    return dist, shift
