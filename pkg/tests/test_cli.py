import json
import math
import os
import subprocess
import sys

import pytest

from dissearch.cli import main
from dissearch.io import read_table


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_example(tmp_path, capsys):
    p = tmp_path / "s.csv"
    assert run(capsys, "spectrum", "--n", "4", "--a", "1", "--b", "2", "--beta", "1",
               "--ell", "4", "--out", str(p))[0] == 0
    cols, rows, meta = read_table(p)
    assert len(rows) == 4
    assert rows[0][2] == pytest.approx((1 - 2) * math.log(4), rel=1e-15)
    assert meta["dominant"] is True and meta["config"]["n"] == 4


def test_equilibrium_degenerate_example(capsys):
    code, out, _ = run(capsys, "equilibrium", "--n", "3", "--epsilon", str(-math.log(10)))
    assert code == 0
    assert json.loads(out)["equilibrium"]["p1_eq"] == pytest.approx(1 / 1.2, rel=1e-14)


def test_invalid_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["spectrum", "--n", "not-a-number"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["spectrum", "--n", "4", "--ell", "9"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_numerical_failure_exit_1(capsys):
    code, _, err = run(capsys, "relax", "--n", "1")
    assert code == 1
    assert json.loads(err)["error"] == "GapClosedError"


def test_tau_scan_then_fit(tmp_path, capsys):
    scan = tmp_path / "scan.csv"
    assert run(capsys, "tau-scan", "--n-grid", "100,200,300,400", "--out", str(scan),
               "--plot", str(tmp_path / "tau.svg"))[0] == 0
    code, out, _ = run(capsys, "fit", "--input", str(scan), "--regime", "log")
    assert code == 0
    fit = json.loads(out)["fit"]
    assert fit["model"] == "log" and 0 <= fit["r2"] <= 1
    code, out, _ = run(capsys, "fit", "--input", str(scan), "--regime", "power")
    assert json.loads(out)["fit"]["model"] == "power"


def test_relax_gamma_gillespie(tmp_path, capsys):
    code, out, _ = run(capsys, "relax", "--n", "50", "--n-times", "3", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["metadata"]["reached"] in (True, False)
    assert doc["rows"][0][1] == pytest.approx(1 / 50)
    code, out, _ = run(capsys, "gamma", "--n-grid", "10,20", "--format", "json")
    assert len(json.loads(out)["rows"]) == 30
    g = tmp_path / "g.csv"
    assert run(capsys, "gillespie", "--n", "20", "--n-traj", "2000", "--times", "1,3",
               "--out", str(g))[0] == 0
    _, rows, meta = read_table(g)
    assert len(rows) == 40 and len(meta["tv_distance"]) == 2


def test_reproduce_small(tmp_path, capsys):
    d1 = tmp_path / "f1"
    code, out, _ = run(capsys, "reproduce-fig1", "--n-grid", "100,200,300,400",
                       "--out-dir", str(d1), "--plot", "--n-points", "10")
    assert code == 0
    assert {"fig1_p1.csv", "fig1_gamma.csv", "fig1_hitting.csv", "fig1_p1.svg"} <= set(
        os.listdir(d1))
    d2 = tmp_path / "f2"
    code, out, _ = run(capsys, "reproduce-fig2", "--regime", "log", "--n-grid",
                       "100,150,200,300", "--out-dir", str(d2), "--plot")
    assert code == 0
    fits = json.loads(out)["fits"]
    assert len(fits) == 5 and all(f["model"] == "log" for f in fits)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, DISSEARCH_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c",
                          "from dissearch import _accel; print(_accel.backend_name())"],
                         env=env, capture_output=True, text=True, check=True).stdout
    assert out.strip() == "numpy"


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "dissearch.cli", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for sub in ("spectrum", "equilibrium", "relax", "gillespie", "tau-scan", "fit", "gamma",
                "reproduce-fig1", "reproduce-fig2"):
        assert sub in out


def test_output_location_not_recorded(tmp_path, capsys):
    outs = []
    for name in ("x.csv", "y.csv"):
        p = tmp_path / name
        run(capsys, "spectrum", "--n", "5", "--out", str(p))
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
