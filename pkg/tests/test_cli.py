import json
import math
import subprocess
import sys

import pytest

from wavespin import cli


@pytest.mark.parametrize("text,expected", [("10nm", 1e-8), ("1e-8", 1e-8), ("1e-8m", 1e-8), ("0.5um", 5e-7),
                                           (" 3pm ", 3e-12)])
def test_parse_length(text, expected):
    assert cli.parse_length(text) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("text", ["-1", "0nm", "ten", "10 parsecs", "nan", "inf"])
def test_parse_length_rejects(text):
    import argparse

    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_length(text)


def test_observables_json(capsys):
    assert cli.main(["observables", "--L", "10nm", "--json"]) == 0
    obs = json.loads(capsys.readouterr().out)["observables"]
    assert obs["eta"]["value"] == pytest.approx(3.033e-5, rel=1e-3)
    assert obs["S2_over_hbar2"]["value"] == pytest.approx(0.75, rel=1e-10)
    assert obs["Sz_deficit_over_hbar"]["value"] == pytest.approx(1.84e-9, rel=1e-2)
    assert obs["E_minus_mc2"]["unit"] == "J"


def test_observables_table(capsys):
    assert cli.main(["observables", "--L", "1m"]) == 0
    out = capsys.readouterr().out
    row = next(line for line in out.splitlines() if line.startswith("Sz_over_hbar "))
    assert abs(float(row.split()[1]) - 0.5) <= 0.5e-15


def test_well_outputs(tmp_path, capsys):
    assert cli.main(["well", "--L", "10nm", "--grid", "41", "--stride", "4", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["current.svg", "field.csv", "jmag.ppm", "jmag.ppm.txt", "manifest.json", "rho.ppm",
                     "rho.ppm.txt"]
    m = json.loads((tmp_path / "manifest.json").read_text())
    assert m["scalars"]["eta"]["value"] == pytest.approx(3.033e-5, rel=1e-3)
    assert m["residuals"] is None
    assert m["config"]["L"] == {"unit": "m", "value": 1e-8}
    assert "eta" in capsys.readouterr().out


def test_packet_width_ratio(tmp_path, capsys):
    assert cli.main(["packet", "--d", "10nm", "--t", "8.638e-13", "--grid", "31", "--out", str(tmp_path)]) == 0
    s = json.loads((tmp_path / "manifest.json").read_text())["scalars"]
    assert s["width_ratio"]["value"] == pytest.approx(math.sqrt(2), abs=1e-3)
    assert s["t_c"]["value"] == pytest.approx(8.638e-13, rel=5e-3)
    assert (tmp_path / "current.svg").exists()


@pytest.mark.parametrize("argv,fragment", [
    (["well", "--L", "-1"], "--L"),
    (["packet", "--d", "1e-12", "--out", "unused"], "Compton"),
    (["packet", "--t", "-1"], "--t"),
    (["verify", "well", "--grids", "65"], "3 grids"),
    (["verify", "moon"], "target"),
    (["well", "--grid", "5"], "--grid"),
])
def test_usage_errors(argv, fragment, capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2
    assert fragment in capsys.readouterr().err


def test_io_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["well", "--grid", "21", "--out", str(blocker)]) == 1
    assert "I/O" in capsys.readouterr().err


def test_verify_well(tmp_path, capsys):
    assert cli.main(["verify", "well", "--L", "10nm", "--grids", "65,129,257", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verification.json").read_text())
    dirac = next(c for c in report["checks"] if c["name"] == "Dirac residual order")
    assert abs(dirac["value"] - 2) <= 0.2 and dirac["passed"]
    assert all(c["passed"] for c in report["checks"])
    assert "[PASS]" in capsys.readouterr().out


def test_verify_failure_exit_code(tmp_path, capsys):
    argv = ["verify", "well", "--out", str(tmp_path), "--tol-spin-z", "1e-30"]
    assert cli.main(argv) == 3
    err = capsys.readouterr().err
    assert "spin z vs closed form" in err


def test_verify_packet_small(tmp_path, capsys):
    argv = ["verify", "packet", "--d", "10nm", "--nodes", "24", "--points", "50", "--grids", "33,65,129",
            "--out", str(tmp_path)]
    assert cli.main(argv) == 0
    checks = json.loads((tmp_path / "verification.json").read_text())["checks"]
    gaps = [c["value"] for c in checks if c["name"].startswith("oracle overlap")]
    assert len(gaps) == 3 and max(gaps) <= 1e-6


@pytest.mark.parametrize("command", ["well", "packet", "verify", "observables"])
def test_help_lists_flags(command, capsys):
    assert cli.main([command, "--help"]) == 0
    out = capsys.readouterr().out
    assert "--" in out
    if command in ("well", "packet"):
        assert " in m" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wavespin", "observables", "--json"], capture_output=True,
                          text=True, check=True)
    assert json.loads(proc.stdout)["L"]["value"] == 1e-8
