import csv
import io
import os
import subprocess
import sys

import numpy as np
import pytest

from qcorr.cli import main, parse_grid
from qcorr.schemes import nmr_plan
from qcorr.states import bell_state, random_mixed, werner, write_state


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_grid():
    assert np.allclose(parse_grid("0:1:3"), [0, 0.5, 1])
    for bad in ("0:1", "1:0:3", "0:1:0", "a:1:2"):
        with pytest.raises(Exception):
            parse_grid(bad)


def test_measure_bell_and_werner(tmp_path, capsys):
    write_state(tmp_path / "bell.txt", bell_state())
    write_state(tmp_path / "w.txt", werner(0.5))
    code, out, _ = run(["measure", str(tmp_path / "bell.txt")], capsys)
    assert code == 0
    r = rows(out)[0]
    assert float(r["d_g"]) == pytest.approx(1) and float(r["q"]) == pytest.approx(1)
    code, out, _ = run(["measure", str(tmp_path / "w.txt")], capsys)
    assert float(rows(out)[0]["d_g"]) == pytest.approx(0.25)


def test_measure_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("dims 2 2\n1,0 0,0 0,0 0,0\n0,0 0,0 x 0,0\n")
    code, _, err = run(["measure", str(bad)], capsys)
    assert code == 2 and "line 3" in err
    inv = tmp_path / "inv.txt"
    inv.write_text("dims 2 1\n1,0 0,0\n0,0 1,0\n")
    code, _, err = run(["measure", str(inv)], capsys)
    assert code == 3 and "trace" in err
    code, _, _ = run(["measure", str(tmp_path / "missing.txt")], capsys)
    assert code == 2


def test_measure_does_not_touch_input(tmp_path, capsys):
    path = tmp_path / "s.txt"
    write_state(path, random_mixed(2, seed=1))
    before = path.read_bytes()
    run(["measure", str(path)], capsys)
    assert path.read_bytes() == before


def test_scatter_rows_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["scatter", "--samples", "700", "--seed", "3", "-o", str(a)]) == 0
    assert main(["scatter", "--samples", "700", "--seed", "3", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    data = rows(a.read_text())
    assert len(data) == 700
    assert all(float(r["q"]) <= float(r["d_g"]) for r in data)
    code, _, err = run(["scatter", "--samples", "0"], capsys)
    assert code == 2


def test_dqc1_command(capsys):
    code, out, err = run(["dqc1", "--mu-grid", "0:1:21", "--fit"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 21
    assert float(data[-1]["d_g"]) == pytest.approx(0.0531325, abs=1e-6)
    assert "fit" in err
    code, _, _ = run(["dqc1", "--mu-grid", "0:2:3"], capsys)
    assert code == 2


def test_plan_table(capsys):
    code, out, _ = run(["plan", "--d", "3"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert "count=27" in lines[0] and "tomography_count=35" in lines[0]
    assert lines[1] == "label,copies,operator_hash"
    assert len(lines) == 2 + 27
    code, out, _ = run(["plan", "--setting", "optical-swap"], capsys)
    assert len(out.splitlines()) == 2 + 4
    code, _, _ = run(["plan", "--setting", "optical-swap", "--d", "3"], capsys)
    assert code == 2


def test_plan_reconstruction(tmp_path, capsys):
    rho = random_mixed(3, seed=2)
    exp = nmr_plan(3).expectations(rho)
    path = tmp_path / "exp.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "value"])
        for k, v in exp.items():
            w.writerow([k, repr(v)])
    code, out, _ = run(["plan", "--d", "3", "--expectations", str(path)], capsys)
    assert code == 0
    from qcorr.measures import correlation_report

    assert float(rows(out)[0]["d_g"]) == pytest.approx(correlation_report(rho).d_g, abs=1e-12)
    path.write_text("label,value\nX|I,0.1\n")
    code, _, err = run(["plan", "--d", "3", "--expectations", str(path)], capsys)
    assert code == 2 and "missing" in err
    path.write_text("label,value\nX|I,zero\n")
    code, _, err = run(["plan", "--d", "3", "--expectations", str(path)], capsys)
    assert code == 2 and "line 2" in err


def test_verify(capsys):
    code, out, _ = run(["verify", "--states", "2", "--no-circuit"], capsys)
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_dynamics_commands(tmp_path, capsys):
    code, out, _ = run(["dynamics", "phaseflip", "--c", "1,-0.6,0.6", "--gamma", "1", "--t", "0:2:400"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 400
    t = np.array([float(r["t"]) for r in data])
    dg = np.array([float(r["d_g"]) for r in data])
    kink = t[1 + np.argmax(np.abs(np.diff(dg, 2)))]
    assert abs(kink - np.log(1 / 0.6) / 2) < 0.01
    code, out, _ = run(["dynamics", "lorentzian", "--r", "0.75", "--lambda", "0.1", "--output-dir", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "lorentzian_r-0.75_gamma0-1_lambda-0.1.csv").exists()
    code, _, _ = run(["dynamics", "phaseflip", "--c", "1,1,1"], capsys)
    assert code == 2
    code, _, _ = run(["dynamics", "lorentzian", "--gamma0", "-1"], capsys)
    assert code == 2


def test_gap_command(capsys):
    code, out, _ = run(["gap", "lorentzian", "--lambda", "1", "--t", "0:10:101"], capsys)
    assert code == 0
    gaps = [float(r["max_gap"]) for r in rows(out)]
    assert len(gaps) == 11 and np.all(np.diff(gaps) >= -1e-12)


def test_console_script_and_threads_env():
    env = dict(os.environ, QCORR_THREADS="1")
    out = subprocess.run(
        [sys.executable, "-m", "qcorr.cli", "dqc1", "--mu-grid", "1:1:1"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.startswith("mu,d_g,q,entropic\n1,")
