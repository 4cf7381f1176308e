"""Tests for the CSV output tables - Contract TEMSP-CLI-001."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.exceptions import CsvFormatError
from src.models.grid import Grid
from src.models.segment import Segment
from src.models.trajectory import Trajectory
from src.renderers.csv_tables import (
    SCHEMA_VERSION,
    AttractionRow,
    DistanceRow,
    EcdfRow,
    KsRow,
    MeanRow,
    ecdf_rows,
    header,
    read_rows,
    read_segment,
    read_trajectory_values,
    write_rows,
    write_segment,
    write_trajectory,
)


class TestSchemas:
    """Golden headers; changing one requires a schema version bump."""

    def test_schema_version(self):
        """Test the current schema version."""
        assert SCHEMA_VERSION == 1

    def test_golden_headers(self):
        """Test the column sets of every table."""
        assert header(MeanRow) == ["t", "psi", "initial", "dt", "mean", "stderr"]
        assert header(EcdfRow) == ["psi", "initial", "dt", "value", "cdf"]
        assert header(KsRow) == [
            "psi", "dt", "t", "initial_a", "initial_b", "statistic", "critical"
        ]
        assert header(DistanceRow) == [
            "dt", "initial", "t", "reference_initial", "reference_t",
            "method", "value", "bl_lower", "n", "epsilon",
        ]
        assert header(AttractionRow) == [
            "dt", "initial_a", "initial_b", "t", "mean_distance", "fraction_apart"
        ]


class TestRows:
    """Test writing and reading row tables."""

    def test_write_and_read_means(self, tmp_path):
        """Test that floats survive exactly."""
        rows = [MeanRow(0.1, "cos-norm", "xi3", 0.001, 1.0 / 3.0, 0.0)]
        path = tmp_path / "means.csv"
        assert write_rows(path, rows, MeanRow) == 1
        assert path.read_text().splitlines() == [
            "t,psi,initial,dt,mean,stderr",
            "0.1,cos-norm,xi3,0.001,0.3333333333333333,0.0",
        ]
        assert read_rows(path, MeanRow) == rows

    def test_missing_epsilon_is_empty(self, tmp_path):
        """Test that NaN is written as an empty field and read back as NaN."""
        row = DistanceRow(
            0.001, "xi3", 1.0, "xi3", 10.0, "exact-assignment", 0.2, 0.1, 512, math.nan
        )
        path = tmp_path / "distances.csv"
        write_rows(path, [row], DistanceRow)
        assert path.read_text().splitlines()[1].endswith(",512,")
        back = read_rows(path, DistanceRow)[0]
        assert back.n == 512 and math.isnan(back.epsilon)

    def test_ecdf_rows(self):
        """Test rows built from jump points."""
        rows = ecdf_rows("cos-norm", "xi1", 0.001, np.array([0.5, 0.9]), np.array([0.5, 1.0]))
        assert rows[1] == EcdfRow("cos-norm", "xi1", 0.001, 0.9, 1.0)


class TestMalformedInput:
    """Test parse errors with line numbers."""

    def test_wrong_header(self, tmp_path):
        """Test a header from another table."""
        path = tmp_path / "means.csv"
        path.write_text("psi,initial,dt,value,cdf\ncos-norm,xi1,0.001,0.5,1.0\n")
        with pytest.raises(CsvFormatError) as excinfo:
            read_rows(path, MeanRow)
        assert excinfo.value.line == 1

    def test_wrong_column_count(self, tmp_path):
        """Test a short row."""
        path = tmp_path / "ecdf.csv"
        path.write_text("psi,initial,dt,value,cdf\ncos-norm,xi1,0.001,0.5,1.0\ncos-norm,xi1\n")
        with pytest.raises(CsvFormatError) as excinfo:
            read_rows(path, EcdfRow)
        assert excinfo.value.line == 3

    def test_unparsable_value(self, tmp_path):
        """Test a non-numeric value."""
        path = tmp_path / "ecdf.csv"
        path.write_text("psi,initial,dt,value,cdf\ncos-norm,xi1,fast,0.5,1.0\n")
        with pytest.raises(CsvFormatError, match=":2:"):
            read_rows(path, EcdfRow)

    def test_no_data_rows(self, tmp_path):
        """Test a header-only table."""
        path = tmp_path / "ecdf.csv"
        path.write_text("psi,initial,dt,value,cdf\n")
        with pytest.raises(CsvFormatError) as excinfo:
            read_rows(path, EcdfRow)
        assert excinfo.value.line == 2

    def test_missing_file(self, tmp_path):
        """Test a path that does not exist."""
        with pytest.raises(CsvFormatError):
            read_rows(tmp_path / "absent.csv", EcdfRow)


class TestTrajectoryExport:
    """Test trajectory and segment export."""

    def test_trajectory(self, tmp_path):
        """Test the k, t, x_i columns."""
        values = np.arange(10.0).reshape(5, 2)
        traj = Trajectory(grid=Grid(tau=1.0, N=2, n_steps=2), values=values)
        path = tmp_path / "xi3.csv"
        assert write_trajectory(path, traj) == 5
        lines = path.read_text().splitlines()
        assert lines[0] == "k,t,x_1,x_2"
        assert lines[1] == "-2,-1.0,0.0,1.0"
        assert_allclose(read_trajectory_values(path), values)

    def test_segment(self, tmp_path):
        """Test the j, theta, x_i columns and dt recovery."""
        segment = Segment(np.array([[0.0], [1.0], [4.0], [9.0], [16.0]]), dt=0.25)
        path = tmp_path / "segment.csv"
        assert write_segment(path, segment) == 5
        back = read_segment(path)
        assert back.dt == pytest.approx(0.25)
        assert_allclose(back.nodes, segment.nodes)

    def test_segment_header_checked(self, tmp_path):
        """Test a trajectory file read as a segment."""
        path = tmp_path / "xi3.csv"
        path.write_text("k,t,x_1\n0,0.0,1.0\n")
        with pytest.raises(CsvFormatError):
            read_segment(path)
