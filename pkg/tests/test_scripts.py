import runpy
from pathlib import Path

import numpy as np
import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def load(name):
    return runpy.run_path(str(SCRIPTS / f"{name}.py"), run_name="scripts")


def test_tube_sweep_finds_critical_radius():
    mod = load("tube_radius_sweep")
    assert mod["coincidence_radius"]() == pytest.approx(np.log(2 + np.sqrt(3)), abs=1e-12)
    rows = mod["sweep"]([1.0, np.log(2 + np.sqrt(3))])
    assert [row[4] for row in rows] == [3, 2]


def test_equidistant_scan_row(tmp_path):
    mod = load("equidistant_scan")
    (row,) = mod["scan"]([0.5])
    assert row[3] < 1e-6 and row[5] == "WEquidistant"


def test_root_counts_cli(capsys):
    load("root_counts")["main"](["--n", "3", "--seeds", "0", "5"])
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and all("True" in line for line in out[1:])
