"""
ABOUTME: Tests for the snapshot data model, CSV ingestion/export and error metric
ABOUTME: Covers orientation, missing-value policies, cell-level errors and round trips
"""

import math

import numpy as np
import pytest

from koopman_forecaster.exceptions import ConfigError, IngestError, ShapeError
from koopman_forecaster.timeseries import (
    IngestConfig,
    SnapshotMatrix,
    WindowSpec,
    load_csv,
    relative_error,
    write_csv,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestSnapshotMatrix:
    """Test SnapshotMatrix construction and validation."""

    def test_vector_becomes_single_observable(self):
        """A 1-D input is one observable over T steps."""
        s = SnapshotMatrix(np.array([1.0, 2.0, 3.0]))

        assert s.d == 1
        assert s.T == 3
        np.testing.assert_array_equal(s.column(1), [2.0])

    def test_values_are_read_only_copies(self):
        """Values are copied and cannot be modified in place."""
        source = np.ones((2, 4))
        s = SnapshotMatrix(source)
        source[0, 0] = 5.0

        assert s.values[0, 0] == 1.0
        with pytest.raises(ValueError):
            s.values[0, 0] = 2.0

    def test_rejects_non_finite(self):
        """NaN and inf values are rejected."""
        with pytest.raises(ShapeError, match="finite"):
            SnapshotMatrix(np.array([[1.0, np.nan]]))

    def test_rejects_mismatched_labels(self):
        """Label count must match the number of observables."""
        with pytest.raises(ShapeError, match="labels"):
            SnapshotMatrix(np.ones((2, 3)), labels=("a",))

    def test_rejects_non_positive_dt(self):
        """dt must be positive."""
        with pytest.raises(ConfigError, match="dt"):
            SnapshotMatrix(np.ones((1, 3)), dt=0.0)

    def test_with_values_keeps_metadata(self):
        """with_values swaps values and keeps labels and dt."""
        s = SnapshotMatrix(np.ones((2, 3)), labels=("a", "b"), dt=0.5)
        t = s.with_values(np.zeros((2, 3)))

        assert t.labels == ("a", "b")
        assert t.dt == 0.5
        assert not np.any(t.values)


class TestWindowSpec:
    """Test active window validation."""

    def test_valid_window(self):
        """A consistent window reports its end index."""
        spec = WindowSpec(b=4, w=5, n_h=3, m_h=2)

        assert spec.end == 9
        assert spec.fits(9)
        assert not spec.fits(8)

    def test_ending_at(self):
        """ending_at places the last snapshot at p - 1."""
        spec = WindowSpec.ending_at(10, 3, 2)

        assert spec.b == 5
        assert spec.end == 10

    @pytest.mark.parametrize(
        "b,w,n_h,m_h",
        [(-1, 5, 3, 2), (0, 6, 3, 2), (0, 3, 3, 0), (0, 3, 0, 3)],
    )
    def test_invalid_windows(self, b, w, n_h, m_h):
        """Negative starts, zero splits and w != n_H + m_H are rejected."""
        with pytest.raises(ConfigError):
            WindowSpec(b=b, w=w, n_h=n_h, m_h=m_h)


class TestIngestConfig:
    """Test ingestion option validation."""

    def test_invalid_orientation(self):
        """Unknown orientations are rejected."""
        with pytest.raises(ConfigError, match="orientation"):
            IngestConfig(orientation="columns")

    def test_invalid_nan_policy(self):
        """Unknown missing-value policies are rejected."""
        with pytest.raises(ConfigError, match="nan_policy"):
            IngestConfig(nan_policy="interpolate")


class TestLoadCsv:
    """Test CSV ingestion."""

    def test_rows_are_time_steps(self, temp_dir, rng):
        """A 172 x 3 file gives 3 observables over 172 steps."""
        data = rng.standard_normal((172, 3))
        lines = ["a,b,c"] + [",".join(repr(float(v)) for v in row) for row in data]
        path = _write(temp_dir / "data.csv", "\n".join(lines) + "\n")

        s = load_csv(path)

        assert (s.d, s.T) == (3, 172)
        assert s.labels == ("a", "b", "c")
        np.testing.assert_array_equal(s.values, data.T)

    def test_single_column(self, temp_dir):
        """One column of identical values is a constant scalar signal."""
        path = _write(temp_dir / "x.csv", "x\n7\n7\n7\n7\n7\n")

        s = load_csv(path)

        assert (s.d, s.T) == (1, 5)
        assert np.all(s.values == 7.0)

    def test_reject_policy_reports_cell(self, temp_dir):
        """A blank cell under the reject policy points at row and column."""
        path = _write(temp_dir / "gap.csv", "a,b\n1,2\n3,\n")

        with pytest.raises(IngestError, match=r"row 3, column b") as exc_info:
            load_csv(path, IngestConfig(nan_policy="reject"))

        assert exc_info.value.row == 3
        assert exc_info.value.column == "b"

    def test_forward_fill(self, temp_dir):
        """Blank cells take the previous value of the same observable."""
        path = _write(temp_dir / "gap.csv", "a,b\n1,2\n,5\n3,6\n")

        s = load_csv(path)

        np.testing.assert_array_equal(s.values, [[1.0, 1.0, 3.0], [2.0, 5.0, 6.0]])

    def test_forward_fill_without_history(self, temp_dir):
        """A leading blank cell cannot be forward-filled."""
        path = _write(temp_dir / "gap.csv", "a,b\n,2\n1,3\n")

        with pytest.raises(IngestError, match=r"row 2, column a"):
            load_csv(path)

    def test_non_numeric_cell(self, temp_dir):
        """Text cells are rejected with their location."""
        path = _write(temp_dir / "bad.csv", "a\n1\nfoo\n")

        with pytest.raises(IngestError, match=r"Non-numeric.*row 3, column a"):
            load_csv(path)

    def test_infinite_cell(self, temp_dir):
        """Infinite values are rejected."""
        path = _write(temp_dir / "bad.csv", "a\n1\ninf\n")

        with pytest.raises(IngestError, match="Infinite"):
            load_csv(path)

    def test_no_header_uses_column_numbers(self, temp_dir):
        """Without a header, errors name the 1-based column number."""
        path = _write(temp_dir / "bad.csv", "1,2\n3,x\n")

        with pytest.raises(IngestError, match=r"row 2, column 2"):
            load_csv(path, IngestConfig(header=False))

    def test_rows_are_observables(self, temp_dir):
        """With rows_observables the header labels time steps."""
        path = _write(temp_dir / "wide.csv", "t0,t1,t2\n1,2,3\n4,5,6\n")

        s = load_csv(path, IngestConfig(orientation="rows_observables"))

        assert (s.d, s.T) == (2, 3)
        assert s.timestamps == ("t0", "t1", "t2")
        np.testing.assert_array_equal(s.values, [[1, 2, 3], [4, 5, 6]])

    def test_index_column(self, temp_dir):
        """The first column can hold time labels."""
        path = _write(temp_dir / "dated.csv", "time,a\n2020-01-01,1\n2020-01-02,2\n")

        s = load_csv(path, IngestConfig(index_column=True))

        assert s.timestamps == ("2020-01-01", "2020-01-02")
        np.testing.assert_array_equal(s.values, [[1.0, 2.0]])

    def test_missing_file(self, temp_dir):
        """A missing file is an ingestion error."""
        with pytest.raises(IngestError, match="not found"):
            load_csv(temp_dir / "nope.csv")

    def test_too_short(self, temp_dir):
        """At least two time steps are required."""
        path = _write(temp_dir / "short.csv", "a\n1\n")

        with pytest.raises(IngestError, match="at least 2"):
            load_csv(path)


class TestWriteCsv:
    """Test CSV export."""

    def test_round_trip_is_exact(self, temp_dir, rng):
        """Written values reload bit-for-bit."""
        s = SnapshotMatrix(rng.standard_normal((3, 50)) * 1e3, labels=("p", "q", "r"))
        path = write_csv(s, temp_dir / "out.csv")

        loaded = load_csv(path)

        assert np.array_equal(loaded.values, s.values)
        assert loaded.labels == s.labels

    def test_round_trip_rows_observables(self, temp_dir):
        """The transposed layout reloads with the same values."""
        s = SnapshotMatrix(np.array([[1.0 / 3.0, 2.5, -7.0], [0.1, 0.2, 0.3]]))
        config = IngestConfig(orientation="rows_observables")
        path = write_csv(s, temp_dir / "wide.csv", config)

        loaded = load_csv(path, config)

        assert np.array_equal(loaded.values, s.values)

    def test_default_labels(self, temp_dir):
        """Unlabelled observables are written as x0, x1, ..."""
        path = write_csv(SnapshotMatrix(np.ones((2, 3))), temp_dir / "out.csv")

        assert path.read_text(encoding="utf-8").splitlines()[0] == "x0,x1"


class TestRelativeError:
    """Test the relative prediction error metric."""

    def test_exact_prediction(self):
        """Equal vectors have zero error."""
        assert relative_error([1.0, 1.0], [1.0, 1.0]) == 0.0

    def test_known_value(self):
        """||(2,0) - (1,0)|| / ||(1,0)|| = 1."""
        assert relative_error([2.0, 0.0], [1.0, 0.0]) == pytest.approx(1.0)

    def test_both_zero(self):
        """Predicting zero for zero is exact."""
        assert relative_error([0.0, 0.0], [0.0, 0.0]) == 0.0

    def test_zero_actual(self):
        """A nonzero prediction of zero has infinite error."""
        assert math.isinf(relative_error([1.0], [0.0]))

    def test_length_mismatch(self):
        """Vectors of different lengths are rejected."""
        with pytest.raises(ShapeError, match="Length mismatch"):
            relative_error([1.0, 2.0], [1.0])

    def test_scale_invariance(self, rng):
        """Scaling both vectors leaves the error unchanged."""
        a = rng.standard_normal(6)
        b = rng.standard_normal(6)

        assert relative_error(3.7 * a, 3.7 * b) == pytest.approx(relative_error(a, b))
