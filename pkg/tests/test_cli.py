"""
ABOUTME: Tests for the command-line interface
ABOUTME: Runs each subcommand end to end and checks output files and exit codes
"""

import argparse
import json

import pandas as pd
import pytest

from koopman_forecaster.cli import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    parse_hankel,
    run,
)
from koopman_forecaster.manifest import MANIFEST_NAME, RunManifest

GLOBAL_ARGS = ["--hankel", "54x6", "--window", "60", "--dp", "5", "--eta", "1e-6", "--json"]


@pytest.fixture(autouse=True)
def in_temp_dir(temp_dir, monkeypatch):
    monkeypatch.chdir(temp_dir)
    return temp_dir


class TestParsing:
    """Test argument parsing and usage errors."""

    def test_help(self):
        """--help exits cleanly."""
        assert run(["--help"]) == EXIT_OK

    def test_unknown_flag(self):
        """Unknown flags are usage errors."""
        assert run(["spectrum", "signal.csv", "--bogus"]) == EXIT_CONFIG

    def test_missing_subcommand(self):
        """A subcommand is required."""
        assert run([]) == EXIT_CONFIG

    def test_parse_hankel(self):
        """Hankel sizes are written NxM."""
        assert parse_hankel("54x6") == (54, 6)
        assert parse_hankel("3X2") == (3, 2)

    @pytest.mark.parametrize("text", ["54", "0x3", "ax2"])
    def test_parse_hankel_invalid(self, text):
        """Malformed sizes are rejected."""
        with pytest.raises(argparse.ArgumentTypeError):
            parse_hankel(text)


class TestGenerate:
    """Test synthetic data generation."""

    def test_sinusoids(self, temp_dir):
        """Sinusoids are written as CSV with a manifest."""
        code = run(["generate", "sinusoids", "--steps", "80", "--json"])

        assert code == EXIT_OK
        frame = pd.read_csv(temp_dir / "out" / "sinusoids.csv")
        assert len(frame) == 80
        manifest = RunManifest.load(temp_dir / "out" / MANIFEST_NAME)
        assert manifest.subcommand == "generate sinusoids"
        assert manifest.outputs == ["sinusoids.csv"]
        assert manifest.input_path is None

    def test_disturbance(self, temp_dir):
        """--disturbance injects into the generated signal."""
        run(["generate", "sinusoids", "--steps", "40", "--output-dir", "clean", "--json"])
        run(
            [
                "generate", "sinusoids", "--steps", "40", "--output-dir", "dirty",
                "--disturbance", "spike:10:1:5", "--json",
            ]
        )

        clean = pd.read_csv(temp_dir / "clean" / "sinusoids.csv").to_numpy()
        dirty = pd.read_csv(temp_dir / "dirty" / "sinusoids.csv").to_numpy()
        assert dirty[10, -1] == pytest.approx(clean[10, -1] + 5.0)
        assert (dirty[11:] == clean[11:]).all()

    def test_lorenz_blow_up(self):
        """An unstable integration is a numerical failure."""
        assert run(["generate", "lorenz", "--dt", "1.0", "--steps", "500"]) == EXIT_NUMERICAL

    def test_kmd_not_conjugate_closed(self):
        """A lone complex eigenvalue is a configuration error."""
        assert run(["generate", "kmd", "--eigenvalues", "0.9+0.1j"]) == EXIT_CONFIG


class TestForecastCommands:
    """Test forecasting subcommands on a stationary signal."""

    def test_forecast_global(self, temp_dir, sinusoid_csv):
        """Global forecasting writes predictions, errors, spectra and flags."""
        code = run(["forecast-global", str(sinusoid_csv), *GLOBAL_ARGS])

        assert code == EXIT_OK
        out = temp_dir / "out"
        for name in ("predictions.csv", "errors.csv", "spectrum.csv", "flags.json"):
            assert (out / name).exists()
        assert json.loads((out / "flags.json").read_text(encoding="utf-8")) == []
        errors = pd.read_csv(out / "errors.csv")
        assert errors["relative_error"].max() < 1e-6
        manifest = RunManifest.load(out / MANIFEST_NAME)
        assert manifest.config["gkp"]["w"] == 60
        assert "--output-dir" not in manifest.argv

    def test_forecast_local(self, temp_dir, sinusoid_csv):
        """Local forecasting writes the Hankel size log."""
        code = run(["forecast-local", str(sinusoid_csv), "--kf", "60", "--json"])

        assert code == EXIT_OK
        hankel = pd.read_csv(temp_dir / "out" / "hankel.csv")
        assert list(hankel["p"]) == list(range(5, 61))

    def test_spectrum(self, temp_dir, sinusoid_csv):
        """Every window contributes its Ritz pairs."""
        code = run(["spectrum", str(sinusoid_csv), *GLOBAL_ARGS])

        assert code == EXIT_OK
        frame = pd.read_csv(temp_dir / "out" / "spectrum.csv")
        assert frame["window_start"].nunique() == len(range(60, 241, 5))

    def test_spectrum_console_output(self, sinusoid_csv):
        """Without --json the spectrum table is rendered."""
        args = [a for a in GLOBAL_ARGS if a != "--json"]
        assert run(["spectrum", str(sinusoid_csv), *args]) == EXIT_OK

    def test_retouch(self, temp_dir, sinusoid_csv):
        """A clean signal is written back unchanged."""
        code = run(["retouch", str(sinusoid_csv), *GLOBAL_ARGS])

        assert code == EXIT_OK
        original = pd.read_csv(sinusoid_csv).to_numpy()
        retouched = pd.read_csv(temp_dir / "out" / "retouched.csv").to_numpy()
        assert retouched.shape == original.shape
        assert abs(retouched - original).max() < 1e-9

    def test_missing_input(self):
        """A missing input file is a data error."""
        assert run(["spectrum", "missing.csv", *GLOBAL_ARGS]) == EXIT_DATA

    @pytest.mark.parametrize("window, hankel", [("61", "54x6"), ("312", "104x104")])
    def test_window_mismatch(self, sinusoid_csv, window, hankel):
        """w must equal n_H + m_H."""
        code = run(["spectrum", str(sinusoid_csv), "--hankel", hankel, "--window", window])

        assert code == EXIT_CONFIG

    def test_window_larger_than_data(self, sinusoid_csv):
        """Windows longer than the data are rejected."""
        assert run(["spectrum", str(sinusoid_csv), "--hankel", "200x100"]) == EXIT_CONFIG


class TestReplay:
    """Test manifest replay."""

    def test_replay_reproduces_outputs(self, temp_dir, sinusoid_csv):
        """Replaying a run writes byte-identical files."""
        assert run(["forecast-global", str(sinusoid_csv), *GLOBAL_ARGS, "--output-dir", "a"]) == 0

        code = run(["replay", str(temp_dir / "a" / MANIFEST_NAME), "--output-dir", "b"])

        assert code == EXIT_OK
        for name in ("predictions.csv", "errors.csv", "spectrum.csv", "flags.json", MANIFEST_NAME):
            assert (temp_dir / "a" / name).read_bytes() == (temp_dir / "b" / name).read_bytes()

    def test_replay_changed_input(self, temp_dir, sinusoid_csv):
        """Replay refuses to run on modified input."""
        run(["spectrum", str(sinusoid_csv), *GLOBAL_ARGS])
        sinusoid_csv.write_text("x0\n1\n2\n", encoding="utf-8")

        assert run(["replay", str(temp_dir / "out" / MANIFEST_NAME)]) == EXIT_DATA

    def test_replay_missing_manifest(self, temp_dir):
        """A missing manifest is a configuration error."""
        assert run(["replay", str(temp_dir / "nope.json")]) == EXIT_CONFIG
