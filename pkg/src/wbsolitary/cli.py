"""Command-line front end: ``wbsolitary solve | sweep | validate``.

Configuration comes from an optional JSON file; command-line flags override
its fields.  Each run writes one directory holding ``manifest.json`` plus
``wave.csv`` and ``spectrum.csv`` (and ``aggregate.csv`` for sweeps).

Exit codes: 0 success, 1 invalid configuration, 2 nonconvergence or failed
suite, 3 boundary minimizer (penalty active or initial guess outside the ball).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import records
from .diagnostics import SUITES, run_suites
from .errors import (
    AdmissibilityError,
    BoundaryMinimizerError,
    ConfigurationError,
    InvalidSymbolError,
    NonConvergenceError,
    NonWaveMultiplierError,
    WBError,
)
from .functionals import Nonlinearity, ScalarFunctional, WBFunctional, check_nonlinearity
from .longwave import exponents, ground_state, longwave_grid, minimizer_distance, scale_lw
from .minimizer import MinimizationConfig, minimize
from .spectral import MultiplierOperator, PeriodicGrid, sobolev_norm
from .symbols import BUILTIN_NAMES, builtin_symbol, require_valid
from .waves import reconstruct, regularity_report

log = logging.getLogger("wbsolitary")

EXIT_OK, EXIT_CONFIG, EXIT_FAIL, EXIT_BOUNDARY = 0, 1, 2, 3


@dataclass
class RunConfig:
    backend: str = "wb"
    symbol: str = "bdw"
    q: float | None = None
    ladder: list | None = None
    R2: float | None = None
    radius_factor: float = 50.0
    N: int | None = None
    P: float | None = None
    tol_residual: float = 1e-11
    max_iters: int = 20000
    q_ceiling: float = 0.05
    p: float = 2.0
    c_p: float = 1.0
    S: float = 10.0
    out: str = "run"
    seed: int = 0
    strict: bool = True
    suites: list = field(default_factory=lambda: list(SUITES))
    periods: list = field(default_factory=lambda: [32.0, 64.0, 128.0, 256.0])

    @classmethod
    def from_sources(cls, file_data: dict | None, overrides: dict) -> "RunConfig":
        data = dict(file_data or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"{unknown[0]}: unknown configuration field")
        data.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**data)
        cfg.check()
        return cfg

    def check(self, need_q: bool = False, need_ladder: bool = False) -> None:
        def bad(name, msg):
            raise ConfigurationError(f"{name}: {msg}")

        if self.backend not in ("wb", "scalar"):
            bad("backend", "must be 'wb' or 'scalar'")
        if self.q is not None and self.ladder is not None:
            bad("q", "give exactly one of q and ladder")
        if self.q is not None and not (isinstance(self.q, (int, float)) and self.q > 0 and math.isfinite(self.q)):
            bad("q", "q must be positive")
        if need_q and self.q is None:
            bad("q", "required")
        if need_ladder and not self.ladder:
            bad("ladder", "required")
        if self.ladder is not None:
            lad = [float(x) for x in self.ladder]
            if any(not x > 0 for x in lad):
                bad("ladder", "entries must be positive")
            if any(b <= a for a, b in zip(lad, lad[1:])):
                bad("ladder", "must be strictly increasing")
            if lad and self.q_ceiling is not None and lad[-1] >= self.q_ceiling:
                bad("ladder", f"q = {lad[-1]:g} crosses q_ceiling = {self.q_ceiling:g}")
            self.ladder = lad
        if self.q is not None and self.q_ceiling is not None and self.q >= self.q_ceiling:
            bad("q", f"q = {self.q:g} is not below q_ceiling = {self.q_ceiling:g}")
        if self.R2 is not None and not self.R2 > 0:
            bad("R2", "must be positive")
        if (self.N is None) != (self.P is None):
            bad("N", "give both N and P or neither")
        if self.N is not None:
            if self.N < 4 or self.N & (self.N - 1):
                bad("N", "must be a power of two >= 4")
            if not self.P > 0:
                bad("P", "must be positive")
        if not self.tol_residual > 0:
            bad("tol_residual", "must be positive")
        if not self.S > 0:
            bad("S", "must be positive")
        for name in self.suites:
            if name not in SUITES:
                bad("suites", f"unknown suite {name!r}")

    def nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(p=self.p, c_p=self.c_p)


def load_symbol(source: str):
    if source in BUILTIN_NAMES:
        return builtin_symbol(source)
    path = Path(source)
    if path.suffix.lower() == ".csv" or path.exists():
        return records.read_symbol_csv(path)
    raise ConfigurationError(f"symbol: {source!r} is neither a builtin ({', '.join(BUILTIN_NAMES)}) nor a CSV file")


# --------------------------------------------------------------------------
# Solving


def _profile(cfg: RunConfig, symbol):
    """Long-wave profile and its width for seeding and grid sizing."""
    p2 = cfg.backend == "wb" or cfg.p == 2
    if symbol.j_star == 1 and p2:
        cubic = None if cfg.backend == "wb" else -cfg.c_p / 3.0
        gs = ground_state(symbol, cubic=cubic)
        return gs, gs.profile, 1.0 / gs.b
    sign = -1.0 if cfg.backend == "wb" or cfg.c_p < 0 else 1.0
    amp = math.sqrt(2.0 / math.sqrt(math.pi))
    return None, (lambda x: sign * amp * np.exp(-0.5 * np.asarray(x) ** 2)), 1.0


def build_problem(cfg: RunConfig, symbol, q: float):
    exps = exponents(symbol.j_star, 2 if cfg.backend == "wb" else cfg.p)
    gs, profile, width = _profile(cfg, symbol)
    if cfg.N is not None:
        grid = PeriodicGrid(float(cfg.P), int(cfg.N))
    else:
        grid = longwave_grid(profile, q, exps, width=width)
    op = MultiplierOperator(symbol, grid)
    if cfg.backend == "wb":
        F = WBFunctional(op)
    else:
        nl = cfg.nonlinearity()
        check_nonlinearity(nl, symbol.j_star)
        F = ScalarFunctional(op, nl)
    seed = scale_lw(profile, q, exps, grid, edge_tol=np.inf)
    mcfg = MinimizationConfig(
        q=q,
        R=None if cfg.R2 is None else math.sqrt(cfg.R2),
        tol_residual=cfg.tol_residual,
        max_iters=cfg.max_iters,
        q_ceiling=cfg.q_ceiling,
        radius_factor=cfg.radius_factor,
    )
    return F, mcfg, seed, gs, exps


def _grid_tag(grid):
    return {"N": grid.size, "P": grid.period}


def _outcome(F, mcfg, seed):
    """Run the minimizer and map failures onto exit codes."""
    try:
        res = minimize(F, mcfg, seed)
        return res, EXIT_OK, "converged"
    except AdmissibilityError as exc:
        return None, EXIT_BOUNDARY, str(exc)
    except BoundaryMinimizerError as exc:
        return exc.result, EXIT_BOUNDARY, str(exc)
    except (NonConvergenceError, NonWaveMultiplierError) as exc:
        return exc.result, EXIT_FAIL, str(exc)


def _write_fields(outdir: Path, cfg: RunConfig, F, res) -> dict:
    g = res.w.grid
    summary = {}
    if cfg.backend == "wb" and res.lam > 0:
        wave = reconstruct(res.w, res.lam, F.operator)
        records.wave_csv(outdir / "wave.csv", res.w, wave.u, wave.eta)
        summary["wave"] = {**wave.summary(), "grid": _grid_tag(g)}
    else:
        records.wave_csv(outdir / "wave.csv", res.w)
        if cfg.backend == "scalar":
            norm = sobolev_norm(res.w, 2 * F.operator.symbol.j_star)
            summary["W_ball"] = {"norm_H2j": norm, "S": cfg.S, "inside": norm < cfg.S, "grid": _grid_tag(g)}
    records.spectrum_csv(outdir / "spectrum.csv", res.w)
    summary["regularity"] = {**regularity_report(res.w).to_dict(), "grid": _grid_tag(g)}
    return summary


def _manifest(cmd: str, cfg: RunConfig, status: str, code: int, **extra) -> dict:
    return {
        "command": cmd,
        "version": __version__,
        "config": asdict(cfg),
        "seed": cfg.seed,
        "status": status,
        "exit_code": code,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        **extra,
    }


def cmd_solve(cfg: RunConfig) -> int:
    cfg.check(need_q=True)
    symbol = load_symbol(cfg.symbol)
    require_valid(symbol)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    F, mcfg, seed, gs, exps = build_problem(cfg, symbol, cfg.q)
    res, code, status = _outcome(F, mcfg, seed)
    extra = {"grid": _grid_tag(F.grid)}
    if res is not None:
        extra["record"] = res.record(symbol.name)
        if code == EXIT_OK:
            extra.update(_write_fields(outdir, cfg, F, res))
    records.write_json(outdir / "manifest.json", _manifest("solve", cfg, status, code, **extra))
    _report(code, status, extra.get("record"))
    return code


def fitted_exponent(q, lam, m_zero=1.0):
    """Least-squares slope of ``log|lam - m(0)|`` against ``log q``."""
    q = np.asarray(q, dtype=float)
    gap = np.abs(np.asarray(lam, dtype=float) - m_zero)
    if q.size < 2 or np.any(gap <= 0):
        return float("nan")
    return float(np.polyfit(np.log(q), np.log(gap), 1)[0])


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.ladder is None and cfg.q is not None:
        cfg.ladder, cfg.q = [cfg.q], None
    cfg.check(need_ladder=True)
    symbol = load_symbol(cfg.symbol)
    require_valid(symbol)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows, recs = [], []
    code, status, last_good = EXIT_OK, "converged", None
    for i, q in enumerate(cfg.ladder):
        F, mcfg, seed, gs, exps = build_problem(cfg, symbol, q)
        res, code, status = _outcome(F, mcfg, seed)
        if code != EXIT_OK:
            status = f"step {i} (q = {q:g}): {status}"
            break
        last_good = i
        step_dir = outdir / f"q{i:02d}"
        step_dir.mkdir(exist_ok=True)
        extra = _write_fields(step_dir, cfg, F, res)
        rec = res.record(symbol.name)
        recs.append({**rec, **extra})
        defect = dist = float("nan")
        if gs is not None:
            ratio = (res.energy + q * symbol.m_at_zero) / q ** float(exps.energy_order)
            defect = ratio - gs.energy_lw
            dist = minimizer_distance(res.w, q, gs, exps)[0]
        g = res.w.grid
        rows.append((q, res.lam, res.energy, res.h1_sq / q, defect, dist, g.size, g.period))
    records.write_csv(
        outdir / "aggregate.csv",
        ["q", "lambda", "energy", "H1sq_over_q", "lw_ratio_defect", "lw_distance", "N", "P"],
        rows,
    )
    extra = {"records": recs, "last_good_index": last_good}
    if len(rows) >= 2:
        extra["lambda_exponent"] = fitted_exponent([r[0] for r in rows], [r[1] for r in rows], symbol.m_at_zero)
    if rows:
        # single-step sweeps also produce the solve artifacts at the top level
        first = outdir / "q00"
        for name in ("wave.csv", "spectrum.csv"):
            if len(rows) == 1 and (first / name).exists():
                (outdir / name).write_bytes((first / name).read_bytes())
    records.write_json(outdir / "manifest.json", _manifest("sweep", cfg, status, code, **extra))
    _report(code, status, {"steps": len(rows), "lambda_exponent": extra.get("lambda_exponent")})
    return code


def cmd_validate(cfg: RunConfig) -> int:
    cfg.check()
    symbol = load_symbol(cfg.symbol)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    bundle = run_suites(symbol, cfg.suites, strict=cfg.strict, periods=cfg.periods, seed=cfg.seed)
    code = EXIT_OK if bundle.passed else EXIT_FAIL
    status = "pass" if bundle.passed else "fail: " + ", ".join(bundle.failures)
    records.write_json(
        outdir / "manifest.json",
        _manifest("validate", cfg, status, code, suites=bundle.results, failures=bundle.failures),
    )
    _report(code, status, {"suites": list(bundle.results)})
    return code


def _report(code, status, payload):
    line = {"exit_code": code, "status": status}
    if payload:
        line.update({k: v for k, v in payload.items() if k in ("lambda", "c", "residual", "iterations", "steps", "lambda_exponent", "suites", "N", "P")})
    print(json.dumps(records._clean(line), sort_keys=True))


# --------------------------------------------------------------------------
# Argument parsing


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wbsolitary", description="Solitary waves of Whitham-Boussinesq systems by constrained minimization.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file; flags override its fields")
    common.add_argument("--symbol", help="builtin symbol name or CSV path with columns k,m")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--backend", choices=("wb", "scalar"))
    solver.add_argument("--R2", type=float, help="squared ball radius (default radius_factor * q)")
    solver.add_argument("--radius-factor", dest="radius_factor", type=float)
    solver.add_argument("--N", type=int, help="grid size (with --P; default auto)")
    solver.add_argument("--P", type=float, help="period (with --N; default auto)")
    solver.add_argument("--tol", dest="tol_residual", type=float, help="H^1 residual tolerance")
    solver.add_argument("--max-iters", dest="max_iters", type=int)
    solver.add_argument("--q-ceiling", dest="q_ceiling", type=float)
    solver.add_argument("--p", type=float, help="scalar nonlinearity power")
    solver.add_argument("--cp", dest="c_p", type=float, help="scalar nonlinearity coefficient")
    solver.add_argument("--S", type=float, help="bound on ||u||_{H^{2j*}} reported for scalar runs")

    s = sub.add_parser("solve", parents=[common, solver], help="solve at one q")
    s.add_argument("--q", type=float)
    w = sub.add_parser("sweep", parents=[common, solver], help="solve along a ladder of q")
    w.add_argument("--ladder", type=_floats, help="comma-separated increasing q values")
    w.add_argument("--q", type=float, help="single-entry ladder")
    v = sub.add_parser("validate", parents=[common], help="run validation suites")
    v.add_argument("--suite", dest="suites", action="append", choices=SUITES, help="repeatable; default all")
    v.add_argument("--P", dest="periods", type=_floats, help="periods for the periodization suite")
    strict = v.add_mutually_exclusive_group()
    strict.add_argument("--strict", dest="strict", action="store_true", default=None)
    strict.add_argument("--lenient", dest="strict", action="store_false")
    return ap


_HANDLERS = {"solve": cmd_solve, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    opts = vars(args).copy()
    command = opts.pop("command")
    opts.pop("verbose")
    config_path = opts.pop("config", None)
    try:
        file_data = None
        if config_path:
            try:
                file_data = json.loads(Path(config_path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"config: cannot read {config_path}: {exc}") from None
        cfg = RunConfig.from_sources(file_data, opts)
        return _HANDLERS[command](cfg)
    except InvalidSymbolError as exc:
        print(f"error: symbol: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigurationError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
