"""Tests for the dmdfilter command-line interface.

This module drives ``cli_main`` end to end: output formats, determinism, the
filter and estimate commands on paired files, and the exit-code mapping.
"""

import io

import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner

from dmdfilter.main import cli, cli_main
from dmdfilter.models.empirical_estimation import calibrate, empirical_covariances
from dmdfilter.models.filter_core import apply_filter
from dmdfilter.services.io_service import read_pair_csv, read_records


def _run(capsys, *argv):
    code = cli_main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def pair_csv(temp_dir, capsys):
    path = temp_dir / "pair.csv"
    code, _, _ = _run(capsys, "simulate-pair", "--rho-w", "0.6", "--steps", "5000", "--seed", "3", "--out", str(path))
    assert code == 0
    return path


class TestSimulate:
    """Test cases for the simulate commands."""

    def test_stdout_csv(self, capsys):
        code, out, _ = _run(capsys, "simulate", "--v", "0.5", "--steps", "4", "--seed", "1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "k,zeta,d_zeta,w"
        assert len(lines) == 5

    def test_same_seed_same_bytes(self, capsys, temp_dir):
        first, second = temp_dir / "a.csv", temp_dir / "b.csv"
        for path in (first, second):
            assert _run(capsys, "simulate", "--v", "0.5", "--steps", "300", "--seed", "9", "--out", str(path))[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_fixed_init(self, capsys):
        code, out, _ = _run(
            capsys, "simulate", "--v", "0.5", "--sigma", "0", "--steps", "2", "--init", "fixed", "--x0", "1",
            "--no-noises",
        )
        assert code == 0
        assert out == "k,zeta,d_zeta\n0,1,-0.5\n1,0.5,-0.25\n"

    def test_pair_burn_in_drops_leading_steps(self, capsys, temp_dir):
        burned, full = temp_dir / "burned.csv", temp_dir / "full.csv"
        common = ("simulate-pair", "--rho-w", "0.6", "--seed", "4", "--init", "fixed", "--x0", "2.5")
        assert _run(capsys, *common, "--burn-in", "100", "--steps", "50", "--out", str(burned))[0] == 0
        assert _run(capsys, *common, "--burn-in", "0", "--steps", "150", "--out", str(full))[0] == 0
        tail = pd.read_csv(full, float_precision="round_trip").iloc[100:].reset_index(drop=True)
        head = pd.read_csv(burned, float_precision="round_trip")
        assert pd.read_csv(full).loc[0, "alpha"] == 2.5
        for column in ("alpha", "d_alpha", "beta", "d_beta", "w0", "w"):
            np.testing.assert_array_equal(head[column], tail[column])

    def test_json_format(self, capsys):
        code, out, _ = _run(capsys, "simulate", "--v", "0.5", "--steps", "3", "--seed", "1", "--format", "json")
        assert code == 0
        assert len(out.splitlines()) == 3 and out.startswith('{"d_zeta":')

    def test_pair_columns(self, pair_csv):
        frame = pd.read_csv(pair_csv)
        assert list(frame.columns) == ["k", "alpha", "d_alpha", "beta", "d_beta", "w0", "w"]
        assert len(frame) == 5000

    def test_drift_outside_domain(self, capsys):
        code, _, err = _run(capsys, "simulate", "--v", "2.0", "--steps", "4")
        assert code == 2
        assert "Error:" in err

    def test_missing_required_option(self, capsys):
        assert _run(capsys, "simulate", "--steps", "4")[0] == 1

    def test_fluctuations_arguments(self, capsys):
        code, out, _ = _run(capsys, "fluctuations", "--rho", "0.5", "--n", "100", "0.6", "0.5")
        assert code == 0
        assert out == "k,s,zeta\n0,0.59999999999999998,0.99999999999999978\n1,0.5,0\n"

    def test_fluctuations_without_input(self, capsys):
        assert _run(capsys, "fluctuations", "--rho", "0.5", "--n", "10")[0] == 1

    def test_fluctuations_rho_outside_domain(self, capsys):
        assert _run(capsys, "fluctuations", "--rho", "1.0", "--n", "10", "0.5")[0] == 2


class TestFilterCommands:
    """Test cases for filter and estimate on paired CSV files."""

    def test_filter_matches_library(self, capsys, pair_csv, temp_dir):
        phi_path, est_path = temp_dir / "phi.csv", temp_dir / "est.csv"
        code, _, _ = _run(capsys, "filter", str(pair_csv), "--phi-out", str(phi_path), "--out", str(est_path))
        assert code == 0

        cal = calibrate(read_pair_csv(pair_csv))
        phi = pd.read_csv(phi_path, float_precision="round_trip").iloc[0]
        np.testing.assert_allclose(
            [phi.phi11, phi.phi12, phi.phi21, phi.phi22], cal.phi.to_array().ravel(), rtol=1e-12
        )
        estimates = pd.read_csv(est_path, float_precision="round_trip")
        expected = apply_filter(cal.phi, read_pair_csv(pair_csv).beta)
        assert list(estimates.columns) == ["k", "alpha_hat", "d_alpha_hat"]
        np.testing.assert_allclose(estimates["alpha_hat"], expected.alpha_hat, rtol=1e-12)

    def test_filter_reports_matrix_without_phi_out(self, capsys, pair_csv):
        code, out, err = _run(capsys, "filter", str(pair_csv))
        assert code == 0
        assert out.splitlines()[0] == "k,alpha_hat,d_alpha_hat"
        entries = dict(line.split(" = ") for line in err.splitlines() if line.startswith("phi"))
        cal = calibrate(read_pair_csv(pair_csv))
        assert set(entries) == {"phi11", "phi12", "phi21", "phi22"}
        np.testing.assert_allclose(
            [float(entries[key]) for key in ("phi11", "phi12", "phi21", "phi22")],
            cal.phi.to_array().ravel(),
            rtol=1e-15,
        )

    def test_structured_without_drift(self, capsys, pair_csv):
        code, _, err = _run(capsys, "filter", str(pair_csv), "--block-mode", "structured")
        assert code == 1
        assert "--v" in err

    def test_estimate_kv(self, capsys, pair_csv):
        code, out, _ = _run(capsys, "estimate", str(pair_csv), "--format", "kv")
        assert code == 0
        values = dict(line.split(" = ") for line in out.splitlines())
        assert float(values["v0_est"]) == pytest.approx(0.4, abs=0.1)
        assert values["horizon"] == "5000"
        assert values["block_mode"] == "raw"

    def test_estimate_csv(self, capsys, pair_csv):
        code, out, _ = _run(capsys, "estimate", str(pair_csv), "--block-mode", "structured", "--v", "0.5")
        assert code == 0
        frame = pd.read_csv(io.StringIO(out))
        assert frame.loc[0, "horizon"] == 5000
        assert {"v0_est", "sigma0_est", "sigma0_sq_est", "r_alpha_est", "phi11"} <= set(frame.columns)

    def test_estimate_full_ratio_on_canonical_model(self, capsys, temp_dir):
        path = temp_dir / "long.csv"
        argv = ("simulate-pair", "--rho-w", "0.6", "--steps", "100000", "--seed", "8", "--no-noises", "--out", str(path))
        assert _run(capsys, *argv)[0] == 0
        code, out, _ = _run(capsys, "estimate", str(path), "--drift-source", "full", "--format", "kv")
        assert code == 0
        values = dict(line.split(" = ") for line in out.splitlines())
        assert float(values["v0_est"]) == pytest.approx(-1.0 / 15.0, abs=0.05)
        assert values["drift_source"] == "full"
        assert "sigma0_est" not in values and "sigma0_sq_est" not in values

    def test_inconsistent_increments_rejected(self, capsys, pair_csv, temp_dir):
        frame = pd.read_csv(pair_csv, float_precision="round_trip")
        frame.loc[10, "d_alpha"] += 1.0
        path = temp_dir / "edited.csv"
        frame.to_csv(path, index=False, float_format="%.17g")
        code, _, err = _run(capsys, "estimate", str(path))
        assert code == 2
        assert "d_alpha at k=10" in err

    def test_estimate_uncorrelated_is_indeterminate(self, capsys, temp_dir):
        path = temp_dir / "flat.csv"
        path.write_text("k,alpha,d_alpha,beta,d_beta\n0,1,-1,0,1\n1,0,1,1,-1\n2,1,-1,0,1\n", encoding="utf-8")
        assert _run(capsys, "estimate", str(path))[0] == 2

    def test_missing_input(self, capsys, temp_dir):
        assert _run(capsys, "filter", str(temp_dir / "absent.csv"))[0] == 1

    def test_error_rows(self, capsys):
        code, out, _ = _run(capsys, "error", "--rho-w", "0.6", "--steps", "20000", "--seed", "5")
        assert code == 0
        frame = pd.read_csv(io.StringIO(out))
        assert frame["source"].tolist() == ["theory", "empirical"]
        assert frame.loc[1, "trace"] == pytest.approx(frame.loc[0, "trace"], rel=0.1)

    def test_error_from_file(self, capsys, pair_csv):
        code, out, _ = _run(capsys, "error", "--rho-w", "0.6", "--input", str(pair_csv))
        assert code == 0
        assert out.splitlines()[0] == "source,g11,g12,g22,trace,gamma_ab"


class TestCovariancesCommand:
    """Test cases for the sample-moment report."""

    def test_kv_moments(self, capsys, pair_csv):
        code, out, _ = _run(capsys, "covariances", str(pair_csv))
        assert code == 0
        values = dict(line.split(" = ") for line in out.splitlines())
        assert values["horizon"] == "5000"
        emp = empirical_covariances(read_pair_csv(pair_csv))
        assert float(values["r_ab"]) == emp.r_ab
        assert float(values["r_bD"]) == emp.r_bD
        assert "a_t" not in values

    def test_corrections_csv(self, capsys, pair_csv):
        code, out, _ = _run(capsys, "covariances", str(pair_csv), "--rho-w", "0.6", "--corrections", "--format", "csv")
        assert code == 0
        frame = pd.read_csv(io.StringIO(out))
        assert {"r_ab", "r_abD", "a_t", "b_t", "c_t", "noise_cross", "max_residual"} <= set(frame.columns)
        assert frame.loc[0, "max_residual"] < 1e-10
        assert frame.loc[0, "c_t"] == pytest.approx(0.6, abs=0.15)

    def test_corrections_under_wrong_model(self, capsys, pair_csv):
        assert _run(capsys, "covariances", str(pair_csv), "--v", "1.2", "--rho-w", "0.6", "--corrections")[0] == 2

    def test_corrections_need_noise_columns(self, capsys, temp_dir):
        path = temp_dir / "bare.csv"
        assert _run(capsys, "simulate-pair", "--rho-w", "0.6", "--steps", "100", "--no-noises", "--out", str(path))[0] == 0
        assert _run(capsys, "covariances", str(path), "--corrections")[0] == 2


class TestStudyCommand:
    """Test cases for the study command."""

    def test_passing_study(self, capsys, study_config_file, temp_dir):
        out = temp_dir / "records.csv"
        code, _, err = _run(capsys, "study", "--config", str(study_config_file), "--out", str(out))
        assert code == 0
        assert "PASS consistency" in err
        assert len(read_records(out)) == 6
        assert (temp_dir / "records.summary.csv").is_file()

    def test_failing_study(self, capsys, temp_dir):
        path = temp_dir / "bad.conf"
        path.write_text("study = consistency\nsigma0 = 0\nrho_w = 0.6\nhorizons = 200\nreplicas = 2\n", encoding="utf-8")
        code, out, err = _run(capsys, "study", "--config", str(path))
        assert code == 3
        assert "FAIL consistency" in err
        assert out.splitlines()[0].startswith("study,")

    def test_invalid_config(self, capsys, temp_dir):
        path = temp_dir / "bad.conf"
        path.write_text("horizons = 1\n", encoding="utf-8")
        assert _run(capsys, "study", "--config", str(path))[0] == 2

    def test_deterministic_output(self, capsys, study_config_file, temp_dir):
        first, second = temp_dir / "one.csv", temp_dir / "two.csv"
        _run(capsys, "study", "--config", str(study_config_file), "--out", str(first))
        _run(capsys, "study", "--config", str(study_config_file), "--out", str(second), "--workers", "2")
        assert first.read_bytes() == second.read_bytes()


class TestCliGroup:
    """Test cases for the click group itself."""

    def test_help_lists_commands(self):
        result = CliRunner().invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in ("simulate", "simulate-pair", "fluctuations", "filter", "estimate", "covariances", "error", "study"):
            assert name in result.output

    def test_version(self):
        result = CliRunner().invoke(cli, ["--version"])
        assert result.exit_code == 0

    def test_unknown_command(self, capsys):
        assert _run(capsys, "bootstrap")[0] == 1
