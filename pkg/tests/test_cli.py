"""CLI contracts: exit codes 0/1/2, deterministic structured output,
subcommand behaviour and the report-path figures."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from noethersphere.cli import main

SCHW = """\
name = schwarzschild
nu = ln(1 - alpha/r)
mu = -ln(1 - alpha/r)
lambda = r2
params.alpha = 1.0
domain = (1.5, 10.0)
"""

GOOD_GEN = "name = X0\neta0 = 1\n"
BAD_GEN = "name = BAD\neta1 = r\n"


@pytest.fixture
def schw_file(tmp_path):
    p = tmp_path / "schw.mtr"
    p.write_text(SCHW)
    return p


def run_cli(args):
    return main([str(a) for a in args])


class TestExitCodes:
    def test_residual_pass_is_zero(self, tmp_path, schw_file, capsys):
        gen = tmp_path / "good.gen"
        gen.write_text(GOOD_GEN)
        assert run_cli(["residual", "--metric", schw_file, "--gen", gen]) == 0
        assert "ok" in capsys.readouterr().out

    def test_residual_fail_is_one_with_witness(self, tmp_path, schw_file, capsys):
        gen = tmp_path / "bad.gen"
        gen.write_text(BAD_GEN)
        assert run_cli(["residual", "--metric", schw_file, "--gen", gen]) == 1
        assert "witness" in capsys.readouterr().out

    def test_missing_file_is_usage_error(self, tmp_path):
        assert run_cli(["residual", "--metric", tmp_path / "nope.mtr",
                        "--gen", tmp_path / "nope.gen"]) == 2

    def test_malformed_metric_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.mtr"
        bad.write_text("nu = sin(\nmu = 0\nlambda = r2\ndomain = (1,2)\n")
        gen = tmp_path / "g.gen"
        gen.write_text(GOOD_GEN)
        assert run_cli(["residual", "--metric", bad, "--gen", gen]) == 2

    def test_unknown_subcommand_is_two(self):
        proc = subprocess.run(
            [sys.executable, "-m", "noethersphere.cli", "nonsense"],
            capture_output=True,
        )
        assert proc.returncode == 2

    def test_unknown_flag_is_two(self):
        proc = subprocess.run(
            [sys.executable, "-m", "noethersphere.cli", "determining", "--frobnicate"],
            capture_output=True,
        )
        assert proc.returncode == 2


class TestCatalogVerify:
    def test_class_filter_passes(self, tmp_path, capsys):
        out = tmp_path / "r.txt"
        code = run_cli(["catalog-verify", "--class", "I", "--seed", 7, "--out", out])
        assert code == 0
        text = out.read_text()
        assert text.count("PASS") >= 5

    def test_structured_output_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(["catalog-verify", "--class", "II", "--seed", 7,
                        "--format", "structured", "--out", a]) == 0
        assert run_cli(["catalog-verify", "--class", "II", "--seed", 7,
                        "--format", "structured", "--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()
        payload = json.loads(a.read_text())
        assert payload["schema"] == "noethersphere-report/1"
        assert payload["seed"] == 7
        assert len(payload["entries"]) == 2
        assert all(e["pass"] for e in payload["entries"])


class TestDetermining:
    def test_text_listing_has_nineteen_equations(self, capsys):
        assert run_cli(["determining", "--lambda", "r2"]) == 0
        out = capsys.readouterr().out
        assert out.count("= 0") >= 19
        assert "unmatched reference equation" in out

    def test_latex_format(self, capsys):
        assert run_cli(["determining", "--lambda", "r2", "--format", "latex"]) == 0
        out = capsys.readouterr().out
        assert r"\xi" in out and r"\dot t" in out


class TestOtherCommands:
    def test_integral_prints_expression(self, tmp_path, schw_file, capsys):
        gen = tmp_path / "good.gen"
        gen.write_text(GOOD_GEN)
        assert run_cli(["integral", "--metric", schw_file, "--gen", gen]) == 0
        out = capsys.readouterr().out
        assert "I[X0]" in out and "td" in out

    def test_brackets_from_catalog(self, capsys):
        assert run_cli(["brackets", "--class", "III", "--case", 2]) == 0
        out = capsys.readouterr().out
        assert "[X0,X42]" in out

    def test_curvature_schwarzschild_vacuum(self, schw_file, capsys):
        assert run_cli(["curvature", "--metric", schw_file]) == 0
        out = capsys.readouterr().out
        assert "R_scalar = 0" in out

    def test_classify(self, schw_file, capsys):
        assert run_cli(["classify", "--metric", schw_file]) == 0
        out = capsys.readouterr().out
        assert "class I" in out and "5 verified" in out

    def test_geodesic_writes_trajectory_and_figure(self, tmp_path, schw_file, capsys):
        out = tmp_path / "traj.txt"
        code = run_cli(["geodesic", "--metric", schw_file, "--seed", 3,
                        "--length", 5.0, "--out", out])
        assert code == 0
        assert out.exists()
        lines = out.read_text().splitlines()
        assert len(lines) > 200
        fig = out.with_suffix(".png")
        assert fig.exists() and fig.stat().st_size > 5000
        assert "drift" in capsys.readouterr().out

    def test_geodesic_no_plot(self, tmp_path, schw_file):
        out = tmp_path / "t2.txt"
        assert run_cli(["geodesic", "--metric", schw_file, "--seed", 3,
                        "--length", 5.0, "--out", out, "--no-plot"]) == 0
        assert not out.with_suffix(".png").exists()

    def test_geodesic_domain_exit_is_one(self, tmp_path, capsys):
        ds = tmp_path / "ds.mtr"
        ds.write_text("name = closed-static\nnu = ln(1 - r^2/b^2)\nmu = -ln(1 - r^2/b^2)\n"
                      "lambda = r2\nparams.b = 2.0\ndomain = (0.2, 1.8)\n")
        code = run_cli(["geodesic", "--metric", ds, "--length", 10.0,
                        "--init", "0,1.75,1.5707,0,1.0,0.9,0,0"])
        assert code == 1
