"""Tests for the command-line interface: sweeps, exponent reports, Monte
Carlo runs, verification, and exit codes."""

import csv
import subprocess
import sys
from pathlib import Path

import pytest

from fadewz.cli import CSV_COLUMNS, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def read_rows(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSweep:
    def test_row_count_and_bound_match(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--lc", "1", "--ls", "1", "--snr-db", "0:40:5",
                     "--scheme", "uncoded", "--out", str(out)])
        assert code == EXIT_OK
        rows = read_rows(out)
        assert len(rows) == 9
        assert list(rows[0].keys()) == CSV_COLUMNS
        for row in rows:
            # uncoded transmission attains the partially informed bound here
            assert abs(float(row["ed_uncoded"]) - float(row["ed_pi"])) <= 1e-5
            assert row["ed_sscc"] == ""  # scheme not selected

    def test_full_schema_ordering_and_range(self, tmp_path):
        out = tmp_path / "full.csv"
        code = main(["sweep", "--lc", "1", "--ls", "1.5", "--snr-db", "10:15:5",
                     "--out", str(out)])
        assert code == EXIT_OK
        rows = read_rows(out)
        assert len(rows) == 2
        for row in rows:
            values = {c: float(row[c]) for c in CSV_COLUMNS[1:8]}
            assert all(0.0 < v <= 1.0 for v in values.values())
            assert values["ed_inf"] <= values["ed_pi"] + 1e-7
            for scheme_col in ("ed_uncoded", "ed_sscc", "ed_jds", "ed_hda", "ed_shda"):
                assert values["ed_pi"] <= values[scheme_col] + 1e-7
            assert values["ed_jds"] <= values["ed_sscc"] + 1e-9

    def test_deterministic_output(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--lc", "0.8", "--ls", "1.2", "--snr-db", "5:10:5",
                "--scheme", "uncoded,jds", "--seed", "7"]
        assert main(args + ["--out", str(a)]) == EXIT_OK
        assert main(args + ["--out", str(b)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_worker_pool_preserves_order_and_values(self, tmp_path):
        serial, pooled = tmp_path / "serial.csv", tmp_path / "pooled.csv"
        args = ["sweep", "--lc", "1", "--ls", "1", "--snr-db", "0:15:5",
                "--scheme", "uncoded"]
        assert main(args + ["--out", str(serial)]) == EXIT_OK
        assert main(args + ["--out", str(pooled), "--workers", "3"]) == EXIT_OK
        assert serial.read_bytes() == pooled.read_bytes()

    def test_empty_range_is_usage_error(self):
        assert main(["sweep", "--lc", "1", "--ls", "1",
                     "--snr-db", "10:5:1"]) == EXIT_USAGE

    def test_bad_scheme_is_usage_error(self):
        assert main(["sweep", "--lc", "1", "--ls", "1", "--snr-db", "0:10:5",
                     "--scheme", "morse"]) == EXIT_USAGE

    def test_missing_required_flag(self):
        assert main(["sweep", "--ls", "1", "--snr-db", "0:10:5"]) == EXIT_USAGE

    def test_plot_rendered(self, tmp_path):
        out = tmp_path / "sweep.csv"
        figure = tmp_path / "sweep.png"
        code = main(["sweep", "--lc", "1", "--ls", "1", "--snr-db", "0:10:10",
                     "--scheme", "uncoded", "--out", str(out), "--plot", str(figure)])
        assert code == EXIT_OK
        assert figure.stat().st_size > 0

    def test_config_file_with_flag_override(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("lc = 1\nls = 1\nsnr_db = 0:40:5\nscheme = uncoded\n")
        out = tmp_path / "cfg.csv"
        code = main(["sweep", "--config", str(config), "--snr-db", "0:10:5",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert len(read_rows(out)) == 3  # flag overrides the config range


class TestExponent:
    def test_spot_value_and_table(self, capsys):
        assert main(["exponent", "--lc", "1", "--ls", "2"]) == EXIT_OK
        text = capsys.readouterr().out
        optimal_line = next(l for l in text.splitlines() if l.startswith("optimal"))
        assert "1.5" in optimal_line

    def test_jds_achiever_regime(self, capsys):
        assert main(["exponent", "--lc", "0.5", "--ls", "1.5"]) == EXIT_OK
        text = capsys.readouterr().out
        optimal_line = next(l for l in text.splitlines() if l.startswith("optimal"))
        assert "jds" in optimal_line and "1.3333" in optimal_line

    def test_invalid_shape_is_usage_error(self):
        assert main(["exponent", "--lc", "-1", "--ls", "2"]) == EXIT_USAGE

    def test_empirical_regression_from_sweep(self, tmp_path, capsys):
        out = tmp_path / "tail.csv"
        assert main(["sweep", "--lc", "1", "--ls", "1", "--snr-db", "40:70:2.5",
                     "--scheme", "uncoded", "--out", str(out)]) == EXIT_OK
        capsys.readouterr()
        assert main(["exponent", "--lc", "1", "--ls", "1",
                     "--from-csv", str(out)]) == EXIT_OK
        text = capsys.readouterr().out
        slope_line = next(l for l in text.splitlines() if "ed_uncoded" in l)
        slope = float(slope_line.split("slope")[1].split()[0])
        assert abs(slope - 1.0) <= 0.1


class TestMc:
    def test_agreement_table(self, capsys):
        code = main(["mc", "--lc", "1", "--ls", "1", "--snr-db", "10",
                     "--scheme", "uncoded,informed", "--samples", "200000",
                     "--seed", "3"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 3  # header + two targets
        for line in lines[1:]:
            assert abs(float(line.split()[-1])) <= 5.0  # z-score column


class TestVerify:
    def test_default_config_passes(self, capsys):
        code = main(["verify", "--lc", "1", "--ls", "1", "--snr-db", "10",
                     "--scheme", "uncoded,sscc,jds,informed,pi",
                     "--rc", "1.0", "--rs", "0.5", "--rj", "1.5",
                     "--samples", "100000", "--seed", "11"])
        text = capsys.readouterr().out
        assert code == EXIT_OK
        assert "FAIL" not in text
        assert "verification passed" in text

    def test_corrupted_tolerance_fails_named(self, tmp_path, capsys):
        config = tmp_path / "bad.cfg"
        config.write_text("tail_mass = 0.01\n")
        code = main(["verify", "--lc", "1", "--ls", "1", "--config", str(config)])
        text = capsys.readouterr().out
        assert code == EXIT_VERIFY
        assert "FAIL tolerances" in text
        assert "tail_mass" in text

    def test_seed_reproducibility_across_runs(self, capsys):
        args = ["verify", "--lc", "1", "--ls", "1", "--snr-db", "10",
                "--scheme", "informed", "--samples", "50000", "--seed", "21"]
        assert main(args) == EXIT_OK
        first = capsys.readouterr().out
        assert main(args) == EXIT_OK
        second = capsys.readouterr().out
        assert first == second


def test_module_entry_point(tmp_path):
    out = tmp_path / "smoke.csv"
    result = subprocess.run(
        [sys.executable, "-m", "fadewz.cli", "sweep", "--lc", "1", "--ls", "1",
         "--snr-db", "10", "--scheme", "uncoded", "--out", str(out)],
        capture_output=True, text=True)
    assert result.returncode == 0
    assert out.exists()
