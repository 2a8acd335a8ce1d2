import csv
import json
import math

import numpy as np
import pytest

from wbsolitary import records
from wbsolitary.cli import main
from wbsolitary.symbols import builtin_symbol


def _manifest(path):
    return json.loads((path / "manifest.json").read_text())


def _rows(path):
    with path.open() as fh:
        return list(csv.DictReader(fh))


@pytest.mark.slow
def test_solve_ok(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["solve", "--backend", "wb", "--symbol", "bdw", "--q", "1e-3", "--out", str(out)]) == 0
    m = _manifest(out)
    assert m["schema"] == 1 and m["seed"] == 0 and m["status"] == "converged"
    assert m["record"]["lambda"] > 0
    assert {"N", "P"} <= set(m["record"]) and {"N", "P"} <= set(m["wave"]["grid"])
    wave = _rows(out / "wave.csv")
    assert list(wave[0]) == ["x", "w", "u", "eta", "N", "P"]
    # scientific notation with 17 significant digits
    mant = wave[0]["w"].split("e")[0].lstrip("-").replace(".", "")
    assert len(mant) == 17
    spectrum = _rows(out / "spectrum.csv")
    assert list(spectrum[0]) == ["k", "abs_w_hat", "N", "P"]
    assert json.loads(capsys.readouterr().out)["exit_code"] == 0


def test_solve_bad_q(tmp_path, capsys):
    assert main(["solve", "--q", "-1", "--out", str(tmp_path / "r")]) == 1
    assert "q must be positive" in capsys.readouterr().err


def test_solve_small_ball_exit3(tmp_path):
    q = 1e-3
    assert main(["solve", "--q", str(q), "--R2", str(q / 100), "--out", str(tmp_path / "r")]) == 3
    assert _manifest(tmp_path / "r")["exit_code"] == 3


def test_solve_nonconvergence_exit2(tmp_path):
    assert main(["solve", "--q", "1e-3", "--max-iters", "2", "--out", str(tmp_path / "r")]) == 2
    m = _manifest(tmp_path / "r")
    assert m["record"]["iterations"] == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"symbol": "whitham", "q": 5e-3, "seed": 42, "backend": "scalar"}))
    out = tmp_path / "r"
    assert main(["solve", "--config", str(cfg), "--q", "1e-3", "--out", str(out)]) == 0
    m = _manifest(out)
    assert m["config"]["q"] == 1e-3 and m["seed"] == 42 and m["record"]["backend"] == "scalar"
    assert m["record"]["lambda"] > 1.0
    assert "W_ball" in m and m["W_ball"]["inside"]


def test_config_errors_name_field(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 1e-3, "bogus": 1}))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 1
    assert "bogus" in capsys.readouterr().err
    assert main(["solve", "--q", "1e-3", "--N", "100", "--P", "50", "--out", str(tmp_path / "r")]) == 1
    assert main(["solve", "--symbol", "nope", "--q", "1e-3", "--out", str(tmp_path / "r")]) == 1
    assert main(["frobnicate"]) == 1


def test_determinism(tmp_path):
    docs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["solve", "--q", "1e-3", "--out", str(out), "--seed", "3"]) == 0
        m = _manifest(out)
        m.pop("timestamp")
        m["config"].pop("out")
        docs.append(json.dumps(m, sort_keys=True))
        assert (out / "wave.csv").read_bytes() == (tmp_path / "a" / "wave.csv").read_bytes()
    assert docs[0] == docs[1]


@pytest.mark.slow
def test_sweep_exponent(tmp_path):
    ladder = ",".join(f"{q:.6g}" for q in np.logspace(-4, -2, 5))
    out = tmp_path / "s"
    assert main(["sweep", "--ladder", ladder, "--tol", "1e-12", "--out", str(out)]) == 0
    rows = _rows(out / "aggregate.csv")
    assert list(rows[0]) == ["q", "lambda", "energy", "H1sq_over_q", "lw_ratio_defect", "lw_distance", "N", "P"]
    assert len(rows) == 5
    assert abs(_manifest(out)["lambda_exponent"] - 2 / 3) <= 0.1
    d = [abs(float(r["lw_distance"])) for r in rows]
    assert d == sorted(d)


def test_sweep_single_and_ceiling(tmp_path):
    out = tmp_path / "one"
    assert main(["sweep", "--ladder", "1e-3", "--out", str(out)]) == 0
    assert len(_rows(out / "aggregate.csv")) == 1
    assert (out / "wave.csv").exists() and (out / "spectrum.csv").exists()
    assert main(["sweep", "--ladder", "1e-3,0.1", "--out", str(tmp_path / "x")]) == 1
    assert main(["sweep", "--ladder", "1e-3,1e-4", "--out", str(tmp_path / "y")]) == 1


def test_sweep_partial_failure(tmp_path):
    out = tmp_path / "p"
    assert main(["sweep", "--ladder", "1e-4,1e-3", "--max-iters", "1", "--out", str(out)]) == 2
    assert _manifest(out)["last_good_index"] is None


def test_validate_bdw(tmp_path):
    out = tmp_path / "v"
    assert main(["validate", "--symbol", "bdw", "--out", str(out)]) == 0
    m = _manifest(out)
    assert m["failures"] == [] and set(m["suites"]) == {"symbol", "kernel", "periodization", "gradient"}


def test_validate_periodization_three(tmp_path):
    out = tmp_path / "v"
    assert main(["validate", "--suite", "periodization", "--P", "32,64,128", "--out", str(out)]) == 0
    rows = _manifest(out)["suites"]["periodization"]["rows"]
    assert [r["P"] for r in rows] == [32, 64, 128]


def test_validate_user_table_strict_flag(tmp_path):
    k = np.linspace(-60, 60, 2401)
    m = builtin_symbol("bdw")(k) * (1 + 1e-4 * np.sign(k))
    path = tmp_path / "user.csv"
    records.write_csv(path, ["k", "m"], zip(k, m))
    assert main(["validate", "--symbol", str(path), "--suite", "symbol", "--out", str(tmp_path / "s")]) == 2
    assert main(["validate", "--symbol", str(path), "--suite", "symbol", "--lenient", "--out", str(tmp_path / "l")]) == 0
    warn = _manifest(tmp_path / "l")["suites"]["symbol"]["warnings"]
    assert warn and "symmetrized" in warn[0]


def test_fmt():
    assert records.fmt(1.0) == "1.0000000000000000e+00"
    assert records.fmt(3) == "3"
    assert records.fmt(True) == "true"
    assert float(records.fmt(math.pi)) == math.pi
