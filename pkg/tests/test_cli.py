import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import SYSTEMS
from nistab.cli import main


def run(*args):
    return main([str(a) for a in args])


def test_classify_delay(capsys):
    assert run("classify", SYSTEMS / "delay_T1.json") == 0
    assert capsys.readouterr().out.strip() == "G: NI (axis pole ω=1, residue 0.1), Gbar: StrictlyNI"


def test_classify_zero_system(capsys):
    assert run("classify", SYSTEMS / "zero_G.json") == 0
    assert capsys.readouterr().out.startswith("G: StableNI")


def test_classify_rhp_pole(capsys):
    assert run("classify", SYSTEMS / "rhp_pole.json") == 2
    assert "witness pole" in capsys.readouterr().out


def test_analyze_stable_with_oracle(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("analyze", SYSTEMS / "delay_T1.json", "--oracle", "--json", out) == 0
    text = capsys.readouterr().out
    assert "oracle_agreement: true" in text
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "StableForAllTau" and doc["oracle_agreement"] is True


def test_analyze_unstable(capsys):
    assert run("analyze", SYSTEMS / "unstable_scalar.json", "--oracle") == 3
    assert "tau* = 0.5" in capsys.readouterr().out


def test_analyze_user_multipliers(capsys):
    assert run("analyze", SYSTEMS / "arm_delta2_passivity.json") == 0


def test_analyze_flags(capsys):
    args = ("analyze", SYSTEMS / "delay_T1.json", "--tau-points", 21, "--grid-lo", 1e-3, "--grid-hi", 1e3, "--grid-points", 200)
    assert run(*args) == 0


def test_inconclusive_exit(tmp_path, capsys):
    doc = json.loads((SYSTEMS / "delay_T1.json").read_text())
    doc["G"]["entries"][0]["terms"][0]["num"] = [-0.2]
    p = tmp_path / "neg.json"
    p.write_text(json.dumps(doc))
    assert run("analyze", p) == 4


def test_schema_errors(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"G": {"rows": 1, "cols": 1}\n')
    assert run("classify", p) == 1
    assert "line 2" in capsys.readouterr().err
    p.write_text('{"G": {"rows": 1}, "Gbar": {"rows": 1, "cols": 1}}')
    assert run("analyze", p) == 1
    assert "G: 'cols' is a required property" in capsys.readouterr().err
    assert run("analyze", tmp_path / "missing.json") == 1


def _read(path):
    rows = list(csv.reader(open(path)))
    return rows[0], np.array(rows[1:], dtype=float)


def test_sweep_ni_defect_closed_form(tmp_path, capsys):
    doc = {
        "G": {"rows": 1, "cols": 1, "entries": [{"row": 0, "col": 0, "terms": [{"num": [1], "den": [1, 1]}]}]},
        "Gbar": {"rows": 1, "cols": 1, "entries": []},
    }
    p = tmp_path / "first.json"
    p.write_text(json.dumps(doc))
    out = tmp_path / "d.csv"
    assert run("sweep", p, "--what", "ni-defect", "--csv", out) == 0
    head, data = _read(out)
    assert head == ["omega", "G_ni_defect", "Gbar_ni_defect"]
    w = data[:, 0]
    assert np.max(np.abs(data[:, 1] - 2 * w / (1 + w**2))) < 1e-12
    assert np.all(data[:, 2] == 0)


def test_sweep_det_and_singvals(tmp_path):
    out = tmp_path / "d.csv"
    assert run("sweep", SYSTEMS / "delay_T1.json", "--what", "det", "--csv", out) == 0
    _, data = _read(out)
    assert data[0, 1] == pytest.approx(0.2, rel=1e-6)
    assert run("sweep", SYSTEMS / "arm_delta1.json", "--what", "singvals", "--csv", out) == 0
    head, data = _read(out)
    assert head[1:] == ["G_sigma_max", "G_sigma_min", "Gbar_sigma_max", "Gbar_sigma_min"]
    assert np.all(data[:, 1] >= data[:, 2])


def test_sweep_arm_defect_off_resonance(tmp_path):
    out = tmp_path / "d.csv"
    run("sweep", SYSTEMS / "arm_delta1.json", "--what", "ni-defect", "--csv", out)
    _, data = _read(out)
    off = np.abs(data[:, 0] - 3.4) > 0.1
    assert np.max(np.abs(data[off, 1])) < 1e-6


def test_winding_command(tmp_path, capsys):
    assert run("winding", SYSTEMS / "unstable_scalar.json", "--tau", 1.0, "--csv", tmp_path / "w.csv") == 0
    assert "winding: 1" in capsys.readouterr().out


def test_module_entry_point_version():
    r = subprocess.run([sys.executable, "-m", "nistab.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("ni ")
