"""Tests for CSV and JSON-lines input/output."""

import numpy as np
import orjson
import pytest

from dmdfilter.exceptions import DomainError, TrajectoryLengthError
from dmdfilter.models.dmd_core import simulate_dmd, simulate_pair
from dmdfilter.schemas.matrix_schemas import FilterMatrix
from dmdfilter.schemas.study_schemas import StudyRecord
from dmdfilter.services.io_service import (
    ERROR_REPORT_COLUMNS,
    error_report_frame,
    filter_matrix_frame,
    frame_to_csv,
    pair_frame,
    read_pair_csv,
    read_records,
    read_trajectory_csv,
    render,
    render_records,
    trajectory_frame,
    write_records,
    write_text,
)


def _records():
    common = {"study": "consistency", "v0": 0.4, "sigma0": 1.0, "v": 0.5, "sigma": 1.0, "rho_w": 0.6, "seed": 99}
    return [
        StudyRecord(**common, horizon=200, replica=1, v0_est=0.1 + 0.2, sigma0_sq_est=1.0 / 3.0),
        StudyRecord(**common, horizon=100, replica=0, status="failed", failure_reason="IndeterminateRatioError: flat"),
        StudyRecord(**common, horizon=100, replica=1, v0_est=0.41, phi11=-1e-300),
    ]


class TestFrames:
    """Test cases for the row layouts."""

    def test_trajectory_columns(self, signal_params):
        frame = trajectory_frame(simulate_dmd(signal_params, 5, seed=1))
        assert list(frame.columns) == ["k", "zeta", "d_zeta", "w"]
        assert frame["k"].tolist() == [0, 1, 2, 3, 4]

    def test_trajectory_without_noises(self, signal_params):
        frame = trajectory_frame(simulate_dmd(signal_params, 5, seed=1, keep_noises=False))
        assert list(frame.columns) == ["k", "zeta", "d_zeta"]

    def test_pair_columns(self, short_pair):
        assert list(pair_frame(short_pair).columns) == ["k", "alpha", "d_alpha", "beta", "d_beta", "w0", "w"]
        assert len(pair_frame(short_pair)) == 64

    def test_filter_matrix_row(self):
        frame = filter_matrix_frame(FilterMatrix(phi11=0.5, phi12=0.0, phi21=-0.2, phi22=0.0))
        assert frame_to_csv(frame) == "phi11,phi12,phi21,phi22\n0.5,0,-0.20000000000000001,0\n"

    def test_error_report_columns(self):
        frame = error_report_frame([{"source": "theory", "g11": 1.0, "g12": 0.0, "g22": 1.0, "trace": 2.0, "gamma_ab": 0.0}])
        assert list(frame.columns) == ERROR_REPORT_COLUMNS


class TestRender:
    """Test cases for CSV and JSON rendering."""

    def test_json_lines_sorted_keys(self):
        text = render(filter_matrix_frame(FilterMatrix(phi11=0.5, phi12=0.0, phi21=-0.2, phi22=0.0)), "json")
        assert text == '{"phi11":0.5,"phi12":0.0,"phi21":-0.2,"phi22":0.0}\n'

    def test_unknown_format(self):
        with pytest.raises(DomainError):
            render(filter_matrix_frame(FilterMatrix.zeros()), "xml")

    def test_write_text_creates_parents(self, temp_dir):
        target = temp_dir / "nested" / "out.csv"
        write_text("a\n", target)
        assert target.read_bytes() == b"a\n"

    def test_write_text_none_is_noop(self):
        write_text("a\n", None)


class TestTrajectoryFiles:
    """Test cases for reading trajectories back."""

    def test_trajectory_restored_exactly(self, signal_params, temp_dir):
        traj = simulate_dmd(signal_params, 200, seed=4)
        path = temp_dir / "traj.csv"
        write_text(render(trajectory_frame(traj)), path)
        loaded = read_trajectory_csv(path)
        np.testing.assert_array_equal(loaded.values[:-1], traj.values[:-1])
        np.testing.assert_array_equal(loaded.increments, traj.increments)
        np.testing.assert_array_equal(loaded.noises, traj.noises)
        assert loaded.values[-1] == pytest.approx(traj.values[-1], abs=1e-12)

    def test_pair_restored(self, short_pair, temp_dir):
        path = temp_dir / "pair.csv"
        write_text(render(pair_frame(short_pair)), path)
        loaded = read_pair_csv(path)
        assert loaded.steps == 64 and loaded.has_noises
        np.testing.assert_array_equal(loaded.beta.increments, short_pair.beta.increments)
        np.testing.assert_array_equal(loaded.alpha.noises, short_pair.alpha.noises)

    def test_pair_without_noises(self, correlated_model, temp_dir):
        path = temp_dir / "pair.csv"
        write_text(render(pair_frame(simulate_pair(correlated_model, 10, seed=1, keep_noises=False))), path)
        assert not read_pair_csv(path).has_noises

    def test_edited_increment_rejected(self, short_pair, temp_dir):
        frame = pair_frame(short_pair).copy()
        frame.loc[20, "d_beta"] = frame.loc[20, "d_beta"] + 0.5
        path = temp_dir / "pair.csv"
        write_text(render(frame), path)
        with pytest.raises(DomainError, match="d_beta at k=20"):
            read_pair_csv(path)

    def test_edited_state_rejected(self, temp_dir):
        path = temp_dir / "traj.csv"
        path.write_text("k,zeta,d_zeta\n0,0,1\n1,1,1\n2,5,1\n", encoding="utf-8")
        with pytest.raises(DomainError, match="d_zeta at k=1"):
            read_trajectory_csv(path)

    def test_last_increment_sets_terminal_state(self, temp_dir):
        path = temp_dir / "traj.csv"
        path.write_text("k,zeta,d_zeta\n0,0,1\n1,1,-3\n", encoding="utf-8")
        loaded = read_trajectory_csv(path)
        np.testing.assert_array_equal(loaded.values, [0.0, 1.0, -2.0])
        np.testing.assert_array_equal(loaded.increments, [1.0, -3.0])

    def test_single_noise_column_rejected(self, temp_dir):
        path = temp_dir / "pair.csv"
        path.write_text("k,alpha,d_alpha,beta,d_beta,w\n0,1,0,1,0,0.5\n", encoding="utf-8")
        with pytest.raises(DomainError):
            read_pair_csv(path)

    def test_missing_columns(self, temp_dir):
        path = temp_dir / "pair.csv"
        path.write_text("k,alpha,beta\n0,1,1\n", encoding="utf-8")
        with pytest.raises(DomainError, match="d_alpha"):
            read_pair_csv(path)

    def test_empty_file(self, temp_dir):
        path = temp_dir / "traj.csv"
        path.write_text("k,zeta,d_zeta\n", encoding="utf-8")
        with pytest.raises(TrajectoryLengthError):
            read_trajectory_csv(path)

    def test_unordered_index(self, temp_dir):
        path = temp_dir / "traj.csv"
        path.write_text("k,zeta,d_zeta\n1,0.5,0.1\n0,0.6,-0.1\n", encoding="utf-8")
        with pytest.raises(DomainError):
            read_trajectory_csv(path)

    def test_missing_file(self, temp_dir):
        with pytest.raises(DomainError):
            read_pair_csv(temp_dir / "absent.csv")


class TestRecordFiles:
    """Test cases for study record files."""

    @pytest.mark.parametrize("name", ["records.csv", "records.jsonl"])
    def test_records_read_back(self, temp_dir, name):
        path = temp_dir / name
        write_records(_records(), path, fmt="json" if name.endswith("jsonl") else "csv")
        loaded = read_records(path)
        assert loaded == sorted(_records(), key=lambda record: record.sort_key)

    def test_sorted_by_group(self):
        text = render_records(_records())
        lines = text.splitlines()
        assert lines[0].split(",")[:9] == ["study", "v0", "sigma0", "v", "sigma", "rho_w", "horizon", "replica", "seed"]
        assert [line.split(",")[6:8] for line in lines[1:]] == [["100", "0"], ["100", "1"], ["200", "1"]]

    def test_byte_identical(self):
        assert render_records(_records()).encode() == render_records(list(reversed(_records()))).encode()

    def test_json_nulls(self):
        first = orjson.loads(render_records(_records(), "json").splitlines()[0])
        assert first["status"] == "failed"
        assert first["v0_est"] is None
