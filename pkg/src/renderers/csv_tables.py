"""CSV tables written by a run and read back by the plotting layer.

Column sets are part of the output contract; ``SCHEMA_VERSION`` changes
whenever one of the headers below does.
"""

import csv
import logging
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, List, Sequence, Type, TypeVar

import numpy as np

from src.exceptions import CsvFormatError
from src.models.segment import Segment
from src.models.trajectory import Trajectory

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

Row = TypeVar("Row")


@dataclass(frozen=True)
class MeanRow:
    """Sample mean of one functional at one time."""

    t: float
    psi: str
    initial: str
    dt: float
    mean: float
    stderr: float


@dataclass(frozen=True)
class EcdfRow:
    """One jump of an empirical CDF."""

    psi: str
    initial: str
    dt: float
    value: float
    cdf: float


@dataclass(frozen=True)
class KsRow:
    """Two-sample KS statistic between two initial data."""

    psi: str
    dt: float
    t: float
    initial_a: str
    initial_b: str
    statistic: float
    critical: float


@dataclass(frozen=True)
class DistanceRow:
    """Truncated Wasserstein distance with its bounded-Lipschitz lower bound."""

    dt: float
    initial: str
    t: float
    reference_initial: str
    reference_t: float
    method: str
    value: float
    bl_lower: float
    n: int
    epsilon: float


@dataclass(frozen=True)
class AttractionRow:
    """Distance between two initial data driven by the same noise."""

    dt: float
    initial_a: str
    initial_b: str
    t: float
    mean_distance: float
    fraction_apart: float


def header(row_type: Type) -> List[str]:
    """Return the column names of a row type."""
    return [f.name for f in fields(row_type)]


def _format(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def write_rows(path, rows: Iterable, row_type: Type) -> int:
    """Write rows with the header of their type; returns the row count."""
    path = Path(path)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header(row_type))
        for row in rows:
            writer.writerow([_format(value) for value in astuple(row)])
            count += 1
    logger.debug("Wrote %d rows to %s", count, path)
    return count


def _parse(kind, text: str):
    if kind is str:
        return text
    if kind is int:
        return int(text)
    return math.nan if text == "" else float(text)


def read_rows(path, row_type: Type[Row]) -> List[Row]:
    """Read a CSV written by ``write_rows``.

    Raises:
        CsvFormatError: On a missing or wrong header, a wrong column count, an
            unparsable value or a file without data rows
    """
    path = Path(path)
    expected = header(row_type)
    kinds = [f.type for f in fields(row_type)]
    rows: List[Row] = []
    try:
        with open(path, "r", newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            first = next(reader, None)
            if first != expected:
                raise CsvFormatError(str(path), 1, f"expected header {','.join(expected)}")
            for record in reader:
                line = reader.line_num
                if len(record) != len(expected):
                    raise CsvFormatError(
                        str(path), line, f"expected {len(expected)} columns, got {len(record)}"
                    )
                try:
                    rows.append(row_type(*(_parse(k, v) for k, v in zip(kinds, record))))
                except ValueError as exc:
                    raise CsvFormatError(str(path), line, str(exc)) from exc
    except OSError as exc:
        raise CsvFormatError(str(path), 0, f"cannot read file: {exc}") from exc
    if not rows:
        raise CsvFormatError(str(path), 2, "no data rows")
    return rows


def write_trajectory(path, traj: Trajectory) -> int:
    """Write a trajectory as k, t, x_1..x_d for k = -N..n_steps."""
    columns = ["k", "t"] + [f"x_{i + 1}" for i in range(traj.d)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for k, t, state in zip(traj.steps(), traj.times(), traj.values):
            writer.writerow([int(k), repr(float(t))] + [repr(float(x)) for x in state])
    return traj.values.shape[0]


def _read_matrix(path, first_column: str) -> np.ndarray:
    path = Path(path)
    with open(path, "r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        head = next(reader, None)
        if not head or len(head) < 3 or head[0] != first_column:
            raise CsvFormatError(str(path), 1, f"expected header {first_column},...,x_1..x_d")
        data = []
        for record in reader:
            if len(record) != len(head):
                raise CsvFormatError(str(path), reader.line_num, "wrong column count")
            try:
                data.append([float(v) for v in record])
            except ValueError as exc:
                raise CsvFormatError(str(path), reader.line_num, str(exc)) from exc
    if not data:
        raise CsvFormatError(str(path), 2, "no data rows")
    return np.array(data)


def read_trajectory_values(path) -> np.ndarray:
    """Read the state columns of a trajectory CSV, shape (N + n_steps + 1, d)."""
    return _read_matrix(path, "k")[:, 2:]


def write_segment(path, segment: Segment) -> int:
    """Write a segment as j, theta, x_1..x_d for j = 0..N."""
    columns = ["j", "theta"] + [f"x_{i + 1}" for i in range(segment.d)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for j, (theta, node) in enumerate(zip(segment.thetas(), segment.nodes)):
            writer.writerow([j, repr(float(theta))] + [repr(float(x)) for x in node])
    return segment.N + 1


def read_segment(path) -> Segment:
    """Read a segment CSV back, recovering dt from the theta column."""
    data = _read_matrix(path, "j")
    if data.shape[0] < 2:
        raise CsvFormatError(str(path), 2, "a segment needs at least two nodes")
    dt = float(data[1, 1] - data[0, 1])
    return Segment(data[:, 2:], dt)


def ecdf_rows(
    psi: str, initial: str, dt: float, jumps: Sequence, heights: Sequence
) -> List[EcdfRow]:
    """Build the rows of one empirical CDF from its jump points."""
    return [
        EcdfRow(psi, initial, dt, float(value), float(cdf)) for value, cdf in zip(jumps, heights)
    ]
