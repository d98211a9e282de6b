import csv
import json
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from poremetrics.rationals import parse_rational
from poremetrics.setmodels import ContractionSequence, generate

REPO = Path(__file__).resolve().parent.parent


def run_cli(*args, check=True):
    env = dict(os.environ)
    env["PYTHONPATH"] = str(REPO / "src") + os.pathsep + env.get("PYTHONPATH", "")
    proc = subprocess.run(
        [sys.executable, "-m", "poremetrics", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=REPO,
    )
    if check and proc.returncode != 0:
        raise AssertionError(f"CLI failed ({proc.returncode}): {proc.stderr}")
    return proc


def parse_csv(text):
    rows = list(csv.reader(text.strip().splitlines()))
    return rows[0], rows[1:]


class TestGenSet:
    def test_constant_half_level_one(self):
        out = run_cli("gen-set", "--rule", "constant", "--c", "1/2", "--level", "1")
        assert out.stdout.split() == ["0/1", "1/1", "3/2", "5/2"]

    def test_constant_one_level_two(self):
        out = run_cli("gen-set", "--rule", "constant", "--c", "1", "--level", "2")
        points = [parse_rational(tok) for tok in out.stdout.split()]
        assert points == list(range(10))

    def test_half_harmonic_level_zero(self):
        out = run_cli("gen-set", "--rule", "half_harmonic", "--level", "0")
        assert out.stdout.split() == ["0/1", "1/1"]

    def test_spec_file_round_trip(self, tmp_path):
        spec = tmp_path / "set.json"
        run_cli(
            "gen-set", "--rule", "half_harmonic", "--level", "2",
            "--spec-out", str(spec), "--points-out", str(tmp_path / "pts.txt"),
        )
        data = json.loads(spec.read_text())
        assert data["type"] == "generated"
        assert data["contraction"]["rule"] == "half_harmonic"
        out = run_cli("pores", "--set", str(spec), "--cube", "interval:[0,1)", "--max-gen", "6")
        assert "pore" in out.stdout


class TestFig1:
    def test_groups(self, tmp_path):
        out = run_cli("fig1")
        header, rows = parse_csv(out.stdout)
        assert header == ["sequence", "point", "value"]
        by_group = {}
        for label, point, _ in rows:
            by_group.setdefault(label, []).append(parse_rational(point))
        # The unit-contraction group is exactly the integers in [-8, 8].
        assert by_group["c=1"] == list(range(-8, 9))
        # Every group contains -1, 0, 1 and is symmetric about the origin.
        for label, pts in by_group.items():
            assert {-1, 0, 1} <= set(pts)
            assert all(-p in pts for p in pts)
        # Positive constant-1/2 points agree with the generator stage whose
        # envelope first clears the bound.
        ref, _ = generate(ContractionSequence.constant(Fraction(1, 2)), 3)
        assert [p for p in by_group["c=1/2"] if p > 0] == [p for p in ref if 0 < p <= 8]

    def test_byte_identical_and_sidecar(self, tmp_path):
        out1 = tmp_path / "a.csv"
        out2 = tmp_path / "b.csv"
        run_cli("fig1", "--out", str(out1))
        run_cli("fig1", "--out", str(out2))
        assert out1.read_bytes() == out2.read_bytes()
        meta = json.loads((tmp_path / "a.csv.meta.json").read_text())
        assert meta["schema"] == "pore-metrics/1"
        assert "--out" in meta["argv"]


class TestReports:
    def test_ls_ratio_lattice(self):
        out = run_cli("ls-ratio", "--set", "lattice", "--cubes", "unit:[0,1)", "--s", "1/10")
        header, rows = parse_csv(out.stdout)
        assert header == ["cube_id", "s", "L_s", "S_s", "ratio", "depth_ok"]
        assert rows[0][1:] == ["1/10", "1/2", "1/16", "8/1", "true"]

    def test_ls_ratio_json_schema(self):
        out = run_cli(
            "ls-ratio", "--set", "lattice", "--cubes", "unit:[0,1)", "--s", "1/10",
            "--format", "json",
        )
        data = json.loads(out.stdout)
        assert data["schema"] == "pore-metrics/1"
        assert data["max_ratio"] == "8/1"

    def test_ap_scan_constant_column(self):
        out = run_cli(
            "ap-scan", "--set", "point:0", "--alpha", "1/2", "--p", "2",
            "--cubes", "dyadic:-5..5",
        )
        header, rows = parse_csv(out.stdout)
        assert header == ["cube_id", "alpha", "p", "product_lo", "product_hi", "case_tag"]
        assert len(rows) == 11
        for row in rows:
            assert row[3] == "4/3" and row[4] == "4/3" and row[5] == "III"

    def test_ap_scan_jobs_deterministic(self):
        base = run_cli(
            "ap-scan", "--set", "lattice", "--alpha", "1/3", "--p", "2",
            "--cubes", "dyadic:0..3",
        )
        threaded = run_cli(
            "--jobs", "4",
            "ap-scan", "--set", "lattice", "--alpha", "1/3", "--p", "2",
            "--cubes", "dyadic:0..3",
        )
        assert base.stdout == threaded.stdout

    def test_pores_csv_and_json(self):
        out = run_cli("pores", "--set", "lattice", "--cube", "unit:[0,1)", "--max-gen", "5")
        header, rows = parse_csv(out.stdout)
        assert header == ["kind", "generation", "length", "count", "mass", "certainty"]
        assert rows[0] == ["pore", "1", "1/2", "1", "1/2", "exact"]
        assert rows[-1][0] == "tail"
        out = run_cli(
            "pores", "--set", "lattice", "--cube", "unit:[0,1)", "--max-gen", "5",
            "--format", "json",
        )
        data = json.loads(out.stdout)
        assert data["schema"] == "pore-metrics/1"
        assert data["tail_mass"] == "1/32"

    def test_porosity_check(self):
        out = run_cli(
            "porosity-check", "--set", "lattice", "--cube", "unit:[0,1)",
            "--sigma", "1/2", "--gamma", "1/2",
        )
        data = json.loads(out.stdout)
        assert data["holds"] is True
        assert data["achieved_mass"] == "3/4"

    def test_prob_stats_half_harmonic(self):
        out = run_cli("prob-stats", "--rule", "half_harmonic", "--levels", "1..60")
        header, rows = parse_csv(out.stdout)
        assert header == ["level", "EX", "EXinv", "product", "bound_e_pi2_75", "binom_ok"]
        bound = Fraction(114066, 100000)
        for row in rows:
            assert parse_rational(row[3]) <= bound
            assert row[5] == "na"

    def test_prob_stats_constant_half_binomial_column(self):
        out = run_cli("prob-stats", "--rule", "constant", "--c", "1/2", "--levels", "1..8")
        _, rows = parse_csv(out.stdout)
        assert all(row[5] == "true" for row in rows)

    def test_divergence_csv(self, tmp_path):
        main = tmp_path / "stats.csv"
        div = tmp_path / "div.csv"
        run_cli(
            "prob-stats", "--rule", "constant", "--c", "1/2", "--levels", "40..40",
            "--out", str(main), "--divergence-t", "1/10", "--divergence-out", str(div),
        )
        header, rows = parse_csv(div.read_text())
        assert header == ["level", "k_min", "k_max", "tilde_ratio"]
        assert rows[0] == ["40", "7", "11", "16/1"]


class TestExitCodes:
    def test_unknown_flag(self):
        proc = run_cli("--bogus", "fig1", check=False)
        assert proc.returncode == 1

    def test_unknown_subcommand(self):
        proc = run_cli("no-such-command", check=False)
        assert proc.returncode == 1

    def test_precondition_violation(self):
        proc = run_cli(
            "pores", "--set", "lattice", "--cube", "unit:[1/4,1/2)", check=False
        )
        assert proc.returncode == 2
        assert "precondition" in proc.stderr

    def test_insufficient_depth(self):
        proc = run_cli(
            "porosity-check", "--set", "lattice", "--cube", "unit:[0,1)",
            "--sigma", "1/2", "--gamma", "1/1024", "--max-gen", "5",
            check=False,
        )
        assert proc.returncode == 3
        assert "depth" in proc.stderr
