"""
ABOUTME: Snapshot data model, CSV ingestion/export, and prediction error metrics
ABOUTME: Observables are stored as a d x T matrix whose columns are time steps
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import ConfigError, IngestError, ShapeError

ORIENTATIONS = ("rows_time", "rows_observables")
NAN_POLICIES = ("forward_fill", "reject")


@dataclass(frozen=True, eq=False)
class SnapshotMatrix:
    """
    Immutable sequence of observable snapshots.

    Column k of ``values`` is the observable vector at time index
    ``start_index + k``. ``timestamps`` and ``labels`` are optional labels for
    columns and rows respectively; ``dt`` is the uniform time step when known.
    """

    values: np.ndarray
    timestamps: tuple[str, ...] | None = None
    dt: float | None = None
    labels: tuple[str, ...] | None = None
    start_index: int = 0

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values.reshape(1, -1)
        if values.ndim != 2:
            raise ShapeError(f"Snapshot values must be 2-D, got {values.ndim}-D")
        d, t = values.shape
        if d < 1 or t < 1:
            raise ShapeError(f"Snapshot matrix needs d >= 1 and T >= 1, got {d}x{t}")
        if not np.all(np.isfinite(values)):
            raise ShapeError("Snapshot values must be finite")
        if self.timestamps is not None and len(self.timestamps) != t:
            raise ShapeError(f"Expected {t} timestamps, got {len(self.timestamps)}")
        if self.labels is not None and len(self.labels) != d:
            raise ShapeError(f"Expected {d} labels, got {len(self.labels)}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(str(x) for x in self.timestamps))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]

    def column(self, k: int) -> np.ndarray:
        """Observable vector f_k (0-based, relative to start_index)."""
        return self.values[:, k]

    def with_values(self, values: np.ndarray) -> "SnapshotMatrix":
        """Copy of this matrix with the same metadata and new values."""
        return SnapshotMatrix(
            values,
            timestamps=self.timestamps,
            dt=self.dt,
            labels=self.labels,
            start_index=self.start_index,
        )


@dataclass(frozen=True)
class WindowSpec:
    """Active window starting at ``b`` of length ``w`` split as n_H + m_H."""

    b: int
    w: int
    n_h: int
    m_h: int

    def __post_init__(self):
        if self.b < 0:
            raise ConfigError(f"Window start must be >= 0, got {self.b}")
        if self.n_h < 1 or self.m_h < 1:
            raise ConfigError(
                f"Hankel split needs n_H >= 1 and m_H >= 1, got {self.n_h}x{self.m_h}"
            )
        if self.n_h + self.m_h != self.w:
            raise ConfigError(
                f"Window length {self.w} must equal n_H + m_H = {self.n_h + self.m_h}"
            )

    @classmethod
    def ending_at(cls, p: int, n_h: int, m_h: int) -> "WindowSpec":
        """Window W(p, w) whose last snapshot is p - 1."""
        return cls(b=p - n_h - m_h, w=n_h + m_h, n_h=n_h, m_h=m_h)

    @property
    def end(self) -> int:
        """One past the last consumed index."""
        return self.b + self.w

    def fits(self, t: int) -> bool:
        return self.end <= t


@dataclass(frozen=True)
class IngestConfig:
    """How a CSV file maps onto a SnapshotMatrix."""

    delimiter: str = ","
    header: bool = True
    orientation: str = "rows_time"
    nan_policy: str = "forward_fill"
    index_column: bool = False
    dt: float | None = None

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise ConfigError(
                f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}"
            )
        if self.nan_policy not in NAN_POLICIES:
            raise ConfigError(
                f"nan_policy must be one of {NAN_POLICIES}, got {self.nan_policy!r}"
            )
        if len(self.delimiter) != 1:
            raise ConfigError(f"delimiter must be one character, got {self.delimiter!r}")

    def to_dict(self) -> dict:
        return {
            "delimiter": self.delimiter,
            "header": self.header,
            "orientation": self.orientation,
            "nan_policy": self.nan_policy,
            "index_column": self.index_column,
            "dt": self.dt,
        }


def _parse_cells(raw: np.ndarray, row_offset: int, column_names: list) -> np.ndarray:
    """Convert a grid of strings to floats; blanks and NaN become NaN."""
    values = np.full(raw.shape, np.nan)
    for (i, j), cell in np.ndenumerate(raw):
        text = "" if cell is None else str(cell).strip()
        if not text:
            continue
        try:
            number = float(text)
        except ValueError as e:
            raise IngestError(
                f"Non-numeric cell {text!r}", row=i + row_offset, column=column_names[j]
            ) from e
        if math.isinf(number):
            raise IngestError(
                f"Infinite cell {text!r}", row=i + row_offset, column=column_names[j]
            )
        values[i, j] = number
    return values


def load_csv(path: str | Path, config: IngestConfig | None = None) -> SnapshotMatrix:
    """
    Read a numeric CSV into a SnapshotMatrix (observables x time).

    Rows are reported 1-based as they appear in the file, header included.
    Missing cells are either rejected or forward-filled along time according
    to ``config.nan_policy``.

    Raises:
        IngestError: On parse failures, non-numeric cells, or missing cells
            that the policy cannot fill.
    """
    config = config or IngestConfig()
    path = Path(path)
    if not path.exists():
        raise IngestError(f"CSV file not found: {path}")

    try:
        frame = pd.read_csv(
            path,
            sep=config.delimiter,
            header=0 if config.header else None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise IngestError(f"Could not parse {path}: {e}") from e

    timestamps = None
    if config.index_column:
        if config.orientation != "rows_time":
            raise ConfigError("index_column is only supported for rows_time orientation")
        timestamps = tuple(frame.iloc[:, 0].astype(str).str.strip())
        frame = frame.iloc[:, 1:]

    row_offset = 2 if config.header else 1
    column_names = [str(c) for c in frame.columns]
    if config.index_column:
        # keep 1-based file column numbers meaningful when there is no header
        column_names = column_names if config.header else list(range(2, frame.shape[1] + 2))
    elif not config.header:
        column_names = list(range(1, frame.shape[1] + 1))

    values = _parse_cells(frame.to_numpy(dtype=object), row_offset, column_names)

    missing = np.argwhere(np.isnan(values))
    if missing.size:
        i, j = missing[0]
        if config.nan_policy == "reject":
            raise IngestError(
                "Missing value", row=int(i) + row_offset, column=column_names[j]
            )
        time_axis = 0 if config.orientation == "rows_time" else 1
        filled = pd.DataFrame(values).ffill(axis=time_axis).to_numpy()
        still_missing = np.argwhere(np.isnan(filled))
        if still_missing.size:
            i, j = still_missing[0]
            raise IngestError(
                "Missing value with no earlier observation to forward-fill",
                row=int(i) + row_offset,
                column=column_names[j],
            )
        logging.info(f"Forward-filled {len(missing)} missing cells in {path.name}")
        values = filled

    labels = None
    if config.orientation == "rows_time":
        values = values.T
        if config.header:
            labels = tuple(str(c) for c in frame.columns)
    elif config.header:
        # header row labels time steps when rows are observables
        timestamps = tuple(str(c) for c in frame.columns)

    if values.shape[1] < 2:
        raise IngestError(f"Need at least 2 time steps, got {values.shape[1]}")

    snapshots = SnapshotMatrix(values, timestamps=timestamps, dt=config.dt, labels=labels)
    logging.debug(f"Loaded {path.name}: d={snapshots.d}, T={snapshots.T}")
    return snapshots


def write_csv(
    s: SnapshotMatrix, path: str | Path, config: IngestConfig | None = None
) -> Path:
    """
    Write a SnapshotMatrix as CSV with 17 significant digits.

    The layout mirrors ``load_csv`` for the same config, so a write/load pair
    reproduces the values bit-for-bit.
    """
    config = config or IngestConfig()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    labels = list(s.labels) if s.labels else [f"x{i}" for i in range(s.d)]
    if config.orientation == "rows_time":
        frame = pd.DataFrame(s.values.T, columns=labels)
        if config.index_column:
            stamps = s.timestamps or tuple(str(s.start_index + k) for k in range(s.T))
            frame.insert(0, "time", list(stamps))
    else:
        stamps = s.timestamps or tuple(str(s.start_index + k) for k in range(s.T))
        frame = pd.DataFrame(s.values, columns=list(stamps))

    frame.to_csv(
        path,
        sep=config.delimiter,
        header=config.header,
        index=False,
        float_format="%.17g",
        encoding="utf-8",
        lineterminator="\n",
    )
    return path


def relative_error(predicted, actual) -> float:
    """
    Relative prediction error ||predicted - actual||_2 / ||actual||_2.

    Returns 0 when both vectors are zero and +inf when only ``actual`` is zero.

    Raises:
        ShapeError: If the vectors have different lengths.
    """
    predicted = np.asarray(predicted).ravel()
    actual = np.asarray(actual).ravel()
    if predicted.shape != actual.shape:
        raise ShapeError(
            f"Length mismatch: predicted {predicted.shape[0]}, actual {actual.shape[0]}"
        )
    denominator = np.linalg.norm(actual)
    numerator = np.linalg.norm(predicted - actual)
    if denominator == 0.0:
        return 0.0 if numerator == 0.0 else math.inf
    return float(numerator / denominator)
