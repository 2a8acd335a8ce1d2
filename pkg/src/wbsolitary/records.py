"""CSV and JSON artifacts.

Numbers are written in scientific notation with 17 significant digits, and
each row or record carries the grid ``(N, P)`` that produced it.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigurationError
from .spectral import WaveField
from .symbols import Symbol

SCHEMA = 1


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.16e}"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(v) for v in r] for r in body if r], dtype=float)


def wave_csv(path, w: WaveField, u: WaveField | None = None, eta: WaveField | None = None) -> Path:
    g = w.grid
    cols = [g.nodes, w.samples]
    header = ["x", "w"]
    if u is not None:
        header.append("u")
        cols.append(u.samples)
    if eta is not None:
        header.append("eta")
        cols.append(eta.samples)
    header += ["N", "P"]
    rows = (tuple(c[i] for c in cols) + (g.size, g.period) for i in range(g.size))
    return write_csv(path, header, rows)


def spectrum_csv(path, w: WaveField) -> Path:
    """Nonnegative wavenumbers ``kappa_k`` and ``|w_hat(k)|``."""
    g = w.grid
    mag = np.abs(w.rcoefficients)
    k = g.rwavenumbers
    return write_csv(path, ["k", "abs_w_hat", "N", "P"], ((k[i], mag[i], g.size, g.period) for i in range(k.size)))


def read_symbol_csv(path, name: str | None = None, **kw) -> Symbol:
    """Tabulated symbol from a CSV with columns ``k`` and ``m`` (header required)."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"symbol: file {path} does not exist")
    header, data = read_csv(path)
    cols = [h.strip().lower() for h in header]
    try:
        ik, im = cols.index("k"), cols.index("m")
    except ValueError:
        raise ConfigurationError(f"symbol: {path} needs columns 'k' and 'm'") from None
    return Symbol.from_table(data[:, ik], data[:, im], name=name or path.stem, **kw)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def dumps(payload: dict) -> str:
    doc = {"schema": SCHEMA, **payload}
    return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(dumps(payload))
    return path
