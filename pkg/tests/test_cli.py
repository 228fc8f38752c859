import csv
import json
import shutil
import subprocess

import pytest

from magweyl import io
from magweyl.cli import main


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"grid": {"d": 1, "n": 64}, "params": {"seed": 5}}))
    return p


def test_roundtrip_suite_passes(config, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--suite", "roundtrip", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and len(report["suites"][0]["checks"]) == 6
    assert report["prng"] == "numpy.random.PCG64" and report["seed"] == 5
    assert "all 6 checks passed" in capsys.readouterr().out


def test_report_is_deterministic(config, tmp_path):
    texts = []
    for name in ("a", "b"):
        out = tmp_path / name
        main(["run", "--config", str(config), "--suite", "zak", "--out", str(out)])
        texts.append((out / "report.json").read_text())
    assert texts[0] == texts[1]


def test_expansion_tables(config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--suite", "expansion", "--out", str(out),
                 "--grid", "128"]) == 0
    with open(out / "expansion_fits.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert abs(float(rows[1]["fitted_order"]) - 2.0) < 0.2


def test_failing_tolerance_gives_exit_1(config, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", str(config), "--suite", "roundtrip", "--out", str(out),
                 "--tol", "1e-30"]) == 1


def test_missing_required_field_gives_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "grid": {"d": 1}\n}\n')
    assert main(["run", "--config", str(p), "--suite", "zak", "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "grid" in err and "'n' is a required property" in err and "bad.json:2" in err


def test_malformed_json_gives_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"grid": {"n": 32,}}')
    assert main(["run", "--config", str(p), "--suite", "zak", "--out", str(tmp_path / "o")]) == 2
    assert "bad.json:1" in capsys.readouterr().err


def test_unknown_suite_gives_exit_2(config, tmp_path):
    assert main(["run", "--config", str(config), "--suite", "nope", "--out", str(tmp_path)]) == 2


def test_export_symbol_and_operator(config, tmp_path):
    s = tmp_path / "f.mgwl"
    assert main(["export", "--config", str(config), "--object", "symbol", "--out", str(s)]) == 0
    assert io.read(s).values.shape == (64, 64, 1, 1)
    c = tmp_path / "F.csv"
    assert main(["export", "--config", str(config), "--object", "operator", "--out", str(c)]) == 0
    assert c.read_text().startswith("i,j,re,im")


def test_export_to_missing_directory_gives_exit_2(config, tmp_path):
    target = tmp_path / "missing" / "f.mgwl"
    assert main(["export", "--config", str(config), "--object", "symbol", "--out", str(target)]) == 2


@pytest.mark.skipif(shutil.which("magweyl") is None, reason="console script not installed")
def test_console_script_help():
    res = subprocess.run(["magweyl", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "run" in res.stdout
