"""Tests for the command line - Contract TEMSP-CLI-001."""

import pytest

from src.__main__ import build_parser, main


def run_flags(out_dir, *extra):
    """Flags for a twenty-step run of xi3."""
    return [
        "run",
        "--steps", "20",
        "--samples", "4",
        "--initial", "xi3",
        "--out-dir", str(out_dir),
        *extra,
    ]


class TestParser:
    """Test argument parsing."""

    def test_run_flags(self):
        """Test list-valued and enum-valued flags."""
        args = build_parser().parse_args(
            [
                "run",
                "--dt", "0.001,0.0001",
                "--initial", "xi2, xi3",
                "--distance-method", "entropic",
            ]
        )
        assert args.dts == [0.001, 0.0001]
        assert args.initials == ["xi2", "xi3"]
        assert args.distance_method.value == "entropic"
        assert args.override_admissibility is None

    def test_unknown_subcommand(self):
        """Test argparse usage errors."""
        with pytest.raises(SystemExit) as excinfo:
            main(["simulate"])
        assert excinfo.value.code == 2


class TestCommands:
    """Test exit codes of each command."""

    def test_check(self, capsys):
        """Test the certificate and gate report of the builtin model."""
        assert main(["check", "--points", "2000"]) == 0
        output = capsys.readouterr().out
        assert "K=16" in output
        assert "margin_b 0.8243" in output
        assert "dissipativity: consistent at samples" in output

    def test_check_unknown_model(self):
        """Test that configuration errors exit with 2."""
        assert main(["check", "--model", "lorenz"]) == 2

    def test_run_and_plot(self, tmp_path, capsys):
        """Test a small run followed by plotting its tables."""
        out_dir = tmp_path / "out"
        assert main(run_flags(out_dir)) == 0
        assert (out_dir / "manifest.json").is_file()
        plots = tmp_path / "plots"
        code = main(
            ["plot", "--means", str(out_dir / "means.csv"), "--ecdf", str(out_dir / "ecdf.csv"),
             "--out-dir", str(plots)]
        )
        assert code == 0
        assert len(list(plots.glob("*.svg"))) == 4

    def test_run_from_manifest(self, tmp_path):
        """Test that a manifest reproduces the tables byte for byte."""
        first = tmp_path / "first"
        assert main(run_flags(first)) == 0
        second = tmp_path / "second"
        manifest = str(first / "manifest.json")
        assert main(["run", "--config", manifest, "--out-dir", str(second)]) == 0
        for name in ("means.csv", "ecdf.csv", "ks.csv", "distances.csv"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_gate_failure_exit_code(self, tmp_path):
        """Test that a refused step size exits with 3."""
        assert main(run_flags(tmp_path / "out", "--dt", "0.002")) == 3

    def test_override_admissibility(self, tmp_path):
        """Test that the override lets the refused step size run."""
        assert main(run_flags(tmp_path / "out", "--dt", "0.002", "--override-admissibility")) == 0

    def test_missing_plot_input(self, tmp_path):
        """Test that an unreadable CSV exits with 2."""
        absent = str(tmp_path / "absent.csv")
        assert main(["plot", "--means", absent, "--ecdf", absent]) == 2
