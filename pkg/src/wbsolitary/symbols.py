"""Fourier multiplier symbols and their admissibility checks.

A symbol ``m`` acts on periodic fields mode by mode.  Admissible symbols are
even, decay like ``(1 + |k|)**m0`` with ``m0 < 0``, attain a strict global
maximum ``m(0) > 0`` at the origin and have a leading Taylor term of order
``2 * j_star`` with a negative coefficient.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigurationError, DegenerateSymbolError, InvalidSymbolError

Evaluator = Callable[[np.ndarray], np.ndarray]

_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True, eq=False)
class Symbol:
    """Multiplier symbol together with its class data.

    ``evaluator`` must accept and return numpy arrays of wavenumbers.
    Instances are immutable and hash by identity.
    """

    evaluator: Evaluator
    m0: float
    m_at_zero: float
    j_star: int
    d2j_at_zero: float
    name: str
    metadata: dict = field(default_factory=dict, repr=False)

    def __call__(self, k):
        return self.evaluator(np.asarray(k, dtype=float))

    @classmethod
    def from_callable(cls, func: Evaluator, name: str, m0: float, h_min: float = 1e-3) -> "Symbol":
        """Wrap a black-box even evaluator, extracting Taylor data numerically."""
        td = taylor_data(func, h_min)
        m_zero = float(np.asarray(func(np.zeros(1)))[0])
        return cls(func, float(m0), m_zero, td.j_star, td.d2j, name, metadata={"taylor_h_min": h_min})

    @classmethod
    def from_table(
        cls,
        k,
        m,
        name: str = "table",
        m0: float | None = None,
        h_min: float = 1e-2,
    ) -> "Symbol":
        """Build a symbol from sampled ``(k, m(k))`` pairs.

        The table is interpolated with a cubic spline and symmetrized by
        averaging ``m(k)`` and ``m(-k)``.  Beyond the table the symbol is
        continued by the power law ``C (1 + |k|)**m0``, with ``m0`` fitted on
        the outer half of the table when not given.
        """
        k = np.asarray(k, dtype=float)
        m = np.asarray(m, dtype=float)
        if k.ndim != 1 or k.shape != m.shape or k.size < 8:
            raise ConfigurationError("symbol table needs two equal-length columns with >= 8 rows")
        order = np.argsort(k)
        k, m = k[order], m[order]
        if np.any(np.diff(k) <= 0):
            raise ConfigurationError("symbol table has repeated wavenumbers")
        if k[0] < 0:
            spline = CubicSpline(k, m)
            k_lo, k_hi = k[0], k[-1]
            span = min(-k_lo, k_hi)
            asym = _table_asymmetry(spline, span)
        else:
            # one-sided table: mirror it so the spline sees an even function
            kk = np.concatenate([-k[:0:-1], k]) if k[0] == 0 else np.concatenate([-k[::-1], k])
            mm = np.concatenate([m[:0:-1], m]) if k[0] == 0 else np.concatenate([m[::-1], m])
            spline = CubicSpline(kk, mm)
            span = k[-1]
            asym = 0.0

        tail = np.abs(k) >= 0.5 * span
        if m0 is None:
            kt, mt = np.abs(k[tail]), np.abs(m[tail])
            good = mt > 0
            if good.sum() < 2:
                raise ConfigurationError("cannot fit decay order from symbol table tail")
            slope = np.polyfit(np.log1p(kt[good]), np.log(mt[good]), 1)[0]
            m0 = float(slope)
        edge = 0.5 * (spline(span) + spline(-span))
        c_tail = edge / (1.0 + span) ** m0

        def evaluator(x):
            x = np.asarray(x, dtype=float)
            ax = np.abs(x)
            inside = ax <= span
            out = np.empty_like(ax)
            xi = ax[inside]
            out[inside] = 0.5 * (spline(xi) + spline(-xi))
            out[~inside] = c_tail * (1.0 + ax[~inside]) ** m0
            return out

        td = taylor_data(evaluator, h_min)
        m_zero = float(evaluator(np.zeros(1))[0])
        return cls(
            evaluator,
            float(m0),
            m_zero,
            td.j_star,
            td.d2j,
            name,
            metadata={
                "source": "table",
                "raw_asymmetry": asym,
                "table_span": float(span),
                "taylor_h_min": h_min,
            },
        )


def _table_asymmetry(spline, span):
    xs = np.linspace(0.0, span, 2001)
    return float(np.max(np.abs(spline(xs) - spline(-xs))))


def _tanh_over_k(k):
    k = np.abs(np.asarray(k, dtype=float))
    out = np.empty_like(k)
    small = k < _SERIES_CUTOFF
    ks = k[small] ** 2
    out[small] = 1.0 - ks / 3.0 + 2.0 * ks**2 / 15.0
    kb = k[~small]
    out[~small] = np.tanh(kb) / kb
    return out


def _whitham(k):
    return np.sqrt(_tanh_over_k(k))


def _smooth_step(t):
    """C-infinity step from 0 (t <= 1) to 1 (t >= 2)."""
    t = np.asarray(t, dtype=float)
    a = t - 1.0
    b = 2.0 - t
    ea = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
    eb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return ea / (ea + eb)


def _kdv_model(k):
    ak = np.abs(np.asarray(k, dtype=float))
    sigma = _smooth_step(ak)
    cutoff = (1.0 - sigma) + sigma * (3.0 / (1.0 + ak)) ** 3
    return (1.0 - ak**2 / 3.0) * cutoff


_BUILTINS = {
    "bdw": dict(evaluator=_tanh_over_k, m0=-1.0, m_at_zero=1.0, j_star=1, d2j_at_zero=-2.0 / 3.0),
    "whitham": dict(evaluator=_whitham, m0=-0.5, m_at_zero=1.0, j_star=1, d2j_at_zero=-1.0 / 3.0),
    "kdv_model": dict(evaluator=_kdv_model, m0=-1.0, m_at_zero=1.0, j_star=1, d2j_at_zero=-2.0 / 3.0),
}

BUILTIN_NAMES = tuple(_BUILTINS)


@functools.lru_cache(maxsize=None)
def builtin_symbol(name: str) -> Symbol:
    """Return one of the built-in symbols: ``bdw``, ``whitham`` or ``kdv_model``.

    ``bdw`` is ``tanh(k)/k``, ``whitham`` its square root, and ``kdv_model``
    the KdV parabola ``1 - k**2/3`` times a smooth even cutoff (equal to one
    on ``|k| <= 1``) that makes the product decay like ``1/|k|``.
    """
    try:
        data = _BUILTINS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown symbol {name!r}; expected one of {', '.join(BUILTIN_NAMES)}"
        ) from None
    return Symbol(name=name, **data)


# --------------------------------------------------------------------------
# Taylor data


@dataclass(frozen=True)
class SymbolRemainder:
    order: int
    sampled_ratio_bound: float


@dataclass(frozen=True)
class TaylorData:
    j_star: int
    d2j: float
    remainder: SymbolRemainder
    derivatives: dict


def _central_even_derivative(f, n, h):
    i = np.arange(n + 1)
    coeffs = np.array([(-1) ** j * math.comb(n, j) for j in i], dtype=float)
    pts = (n / 2 - i) * h
    return float(np.dot(coeffs, f(pts))) / h**n


def richardson_derivative(f: Evaluator, n: int, h: float) -> float:
    """n-th derivative at 0 (n even) from central differences at h, h/2, h/4."""
    d = [_central_even_derivative(f, n, h / 2**i) for i in range(3)]
    r1 = [(4 * d[i + 1] - d[i]) / 3 for i in range(2)]
    return (16 * r1[1] - r1[0]) / 15


def taylor_data(s, h_min: float = 1e-3, max_order: int = 8, zero_tol: float = 1e-6) -> TaylorData:
    """Leading Taylor order and coefficient of an even symbol at the origin.

    Derivatives of order ``n`` are taken with base step ``4 * h_min**(2/n)``
    so the round-off of the ``n``-th difference stays near ``eps / h_min**2``.
    """
    f = s.evaluator if isinstance(s, Symbol) else s
    f = _vectorized(f)
    m_zero = float(f(np.zeros(1))[0])
    scale = max(1.0, abs(m_zero))
    derivs = {}
    for j in range(1, max_order // 2 + 1):
        n = 2 * j
        h = 4.0 * h_min ** (2.0 / n)
        d = richardson_derivative(f, n, h)
        derivs[n] = d
        if abs(d) > zero_tol * scale:
            rem = _remainder_bound(f, m_zero, j, d)
            return TaylorData(j, d, rem, derivs)
    raise DegenerateSymbolError(
        f"no nonvanishing even derivative up to order {max_order} (values {derivs})"
    )


def _remainder_bound(f, m_zero, j, d2j, k_lo=0.05, k_hi=0.5, count=2001):
    k = np.linspace(k_lo, k_hi, count)
    r = f(k) - m_zero - d2j * k ** (2 * j) / math.factorial(2 * j)
    bound = float(np.max(np.abs(r) / k ** (2 * j + 2)))
    return SymbolRemainder(order=2 * j + 2, sampled_ratio_bound=bound)


def _vectorized(f):
    def g(x):
        return np.asarray(f(np.asarray(x, dtype=float)), dtype=float)

    return g


# --------------------------------------------------------------------------
# Validation


@dataclass
class ClauseResult:
    passed: bool
    witness: float | None = None
    detail: str = ""

    def to_dict(self):
        return {"passed": bool(self.passed), "witness": self.witness, "detail": self.detail}


@dataclass
class ValidationReport:
    symbol: str
    clauses: dict
    fitted_c0: float
    warnings: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    @property
    def failures(self) -> list:
        return [name for name, c in self.clauses.items() if not c.passed]

    def to_dict(self):
        return {
            "schema": 1,
            "symbol": self.symbol,
            "valid": self.valid,
            "fitted_c0": self.fitted_c0,
            "clauses": {k: v.to_dict() for k, v in self.clauses.items()},
            "warnings": list(self.warnings),
        }


def validate_symbol(
    s: Symbol,
    k_max: float = 100.0,
    count: int = 10001,
    taylor_rtol: float = 1e-6,
    even_tol: float = 0.0,
    strict: bool = True,
) -> ValidationReport:
    """Check the admissibility clauses on the symmetric sample ``linspace(-k_max, k_max, count)``.

    Failing clauses carry the smallest-``|k|`` witness.  With ``strict=False`` an
    asymmetric source table (already symmetrized by :meth:`Symbol.from_table`)
    is reported as a warning instead of a failure.
    """
    if k_max < 100.0:
        raise ConfigurationError("validation sample must reach |k| >= 100")
    if count < 3:
        raise ConfigurationError("validation sample needs at least 3 points")
    k = np.linspace(-k_max, k_max, count)
    # make the set exactly symmetric
    k = 0.5 * (k - k[::-1])
    vals = s(k)
    mirror = s(-k)
    clauses = {}
    warnings = []

    asym = np.abs(vals - mirror)
    bad = np.nonzero(asym > even_tol)[0]
    clauses["even"] = _clause(bad, k, f"max |m(k) - m(-k)| = {asym.max():.3g}")
    raw_asym = s.metadata.get("raw_asymmetry", 0.0) if s.metadata else 0.0
    if raw_asym > 1e-12:
        msg = f"source table asymmetric by {raw_asym:.3g}; symmetrized by averaging"
        if strict:
            clauses["even"] = ClauseResult(False, None, msg)
        else:
            warnings.append(msg)

    m_zero = float(s(np.zeros(1))[0])
    clauses["positive_at_zero"] = ClauseResult(
        m_zero > 0 and abs(m_zero - s.m_at_zero) <= 1e-12 * max(1.0, abs(m_zero)),
        None if m_zero > 0 else 0.0,
        f"m(0) = {m_zero:.17g} (declared {s.m_at_zero:.17g})",
    )

    nonzero = k != 0
    bad = np.nonzero(nonzero & (vals >= m_zero))[0]
    clauses["strict_max_at_zero"] = _clause(bad, k, "m(k) < m(0) for k != 0")

    clauses["negative_leading_coefficient"] = ClauseResult(
        s.d2j_at_zero < 0, None, f"m^(2j*)(0) = {s.d2j_at_zero:.6g}"
    )

    tail = np.abs(k) >= 1.0
    if s.m0 < 0:
        weighted = np.abs(vals) * (1.0 + np.abs(k)) ** (-s.m0)
        c0 = float(np.max(weighted))
        half = np.abs(k) >= 0.5 * k_max
        inner = tail & ~half
        grows = np.max(weighted[half]) > 2.0 * max(np.max(weighted[inner]), np.finfo(float).tiny)
        ok = np.isfinite(c0) and not grows
        witness = None
        if not ok:
            witness = float(np.abs(k[half][np.argmax(weighted[half])]))
        clauses["decay"] = ClauseResult(ok, witness, f"C0 = {c0:.6g} for m0 = {s.m0}")
    else:
        c0 = float("inf")
        clauses["decay"] = ClauseResult(False, None, f"m0 = {s.m0} is not negative")

    try:
        # fitted symbols are re-fitted at their construction step: a spline's
        # odd-order jumps at k = 0 make the fit step-dependent
        td = taylor_data(s, s.metadata.get("taylor_h_min", 1e-3) if s.metadata else 1e-3)
        ok = td.j_star == s.j_star and abs(td.d2j - s.d2j_at_zero) <= taylor_rtol * abs(s.d2j_at_zero)
        clauses["taylor"] = ClauseResult(
            ok, None, f"fitted (j*, d2j) = ({td.j_star}, {td.d2j:.12g}); declared ({s.j_star}, {s.d2j_at_zero:.12g})"
        )
    except DegenerateSymbolError as exc:
        clauses["taylor"] = ClauseResult(False, 0.0, str(exc))

    return ValidationReport(s.name, clauses, c0, warnings)


def _clause(bad_idx, k, detail):
    if bad_idx.size == 0:
        return ClauseResult(True, None, detail)
    kb = k[bad_idx]
    pos = kb[kb > 0]
    witness = float(pos.min()) if pos.size else float(kb[np.argmin(np.abs(kb))])
    return ClauseResult(False, witness, detail)


_valid_cache: dict = {}


def require_valid(s: Symbol) -> None:
    """Raise :class:`InvalidSymbolError` unless ``s`` passes validation (cached per instance)."""
    key = id(s)
    hit = _valid_cache.get(key)
    if hit is None or hit[0] is not s:
        report = validate_symbol(s, strict=False)
        hit = (s, report.failures)
        _valid_cache[key] = hit
    if hit[1]:
        raise InvalidSymbolError(s.name, hit[1])
