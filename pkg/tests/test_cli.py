import json
import subprocess
import sys

import pytest

from conftest import DATA
from favard.cli import main
from favard.experiments import DecaySeries, parse_report


def cli(*args):
    return subprocess.run([sys.executable, "-m", "favard", *args], capture_output=True, text=True)


def test_help_lists_subcommands():
    out = cli("--help").stdout
    for name in ("analyze", "favard", "riesz", "slv", "report"):
        assert name in out


def test_analyze_default_is_four_corner():
    res = cli("analyze")
    assert res.returncode == 0
    rep = parse_report(res.stdout)
    assert rep["digit_sets"][0]["S1"] == [2, 6] and rep["branch"] == "N^-eps"
    assert "predicted branch: N^-eps" in res.stdout


def test_favard_golden_bytes(tmp_path):
    out = tmp_path / "fc.csv"
    res = cli("favard", "--config", str(DATA / "four_corner.toml"), "--seed", "42",
              "--samples", "10000", "--out", str(out))
    assert res.returncode == 0 and res.stdout == ""
    assert out.read_bytes() == (DATA / "four_corner_seed42.csv").read_bytes()


def test_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["favard", "--seed", "9", "--samples", "500", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(DecaySeries.from_csv(a.read_text()).rows) == 7


def test_json_lines_and_budget(capsys):
    assert main(["favard", "--seed", "1", "--samples", "50", "--format", "json-lines",
                 "--budget", "300"]) == 0
    rows = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert rows[0]["seed"] == 1
    assert [r["fav_norm"] is None for r in rows[1:]] == [False] * 4 + [True] * 3


def test_timing_fills_seconds(capsys):
    main(["favard", "--seed", "1", "--samples", "50", "--timing", "--budget", "100"])
    series = DecaySeries.from_csv(capsys.readouterr().out)
    assert all(r.seconds is not None for r in series.valid_rows)


def test_missing_seed_exit_code():
    res = cli("favard")
    assert res.returncode == 2 and "seed" in res.stderr


def test_config_error_location(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("digits = [[0, 3], [0, 3]]\nwidth = 3\n")
    res = cli("analyze", "--config", str(bad))
    assert res.returncode == 2 and "line 2, column 9" in res.stderr


def test_budget_error_exit_code(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("digits = [[0, 3], [0, 3]]\nN = 3\n")
    res = cli("riesz", "--config", str(cfg), "--budget", "10")
    assert res.returncode == 1 and "BudgetExceeded" in res.stderr


def test_riesz_and_slv(capsys):
    assert main(["riesz", "--format", "json-lines"]) == 0
    recs = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert recs[0]["quantity"] == "riesz_integral"
    assert main(["slv", "--seed", "2", "--samples", "1000"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# favard 0.1.0 schema=1") and "multiscale_slv" in out


def test_report(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("digits = [[0, 3], [0, 3]]\nN_min = 1\nN_max = 4\n")
    assert main(["report", "--config", str(cfg), "--seed", "3", "--samples", "300"]) == 0
    rep = parse_report(capsys.readouterr().out)
    assert rep["favard"]["seed"] == 3 and len(rep["favard"]["rows"]) == 4


def test_version():
    res = cli("--version")
    assert res.stdout.strip() == "favard 0.1.0"
