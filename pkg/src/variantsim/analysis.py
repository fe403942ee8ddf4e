"""Post-hoc trace analytics: rank correlation, violation statistics, CSV I/O.

Correlation uses the tie-corrected Kendall coefficient (tau-b), computed from
exact integer pair counts so results are bit-identical to an all-pairs count.
Categorical columns are encoded to ordinals with an explicit label map kept
on the table, since the sign of a correlation against a categorical variable
depends on that encoding.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .simulator import SimulationTrace

_FLOAT_FORMAT = "{:.6g}"


@dataclass(frozen=True)
class ObservationTable:
    """Named, equal-length numeric series; categoricals carry their encoding."""

    names: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    encodings: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        lengths = {len(c) for c in self.columns}
        if len(self.names) != len(self.columns):
            raise ValueError("one column per name required")
        if len(lengths) > 1:
            raise ValueError("all columns must have the same length")

    @property
    def n(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.names.index(name)]

    def labels(self, name: str, values: np.ndarray) -> list[str]:
        mapping = self.encodings.get(name)
        if mapping is None:
            return [_FLOAT_FORMAT.format(v) for v in values]
        return [mapping[int(v)] for v in values]

    def select(self, names: Sequence[str]) -> "ObservationTable":
        unknown = [n for n in names if n not in self.names]
        if unknown:
            raise KeyError(f"unknown columns: {', '.join(unknown)}")
        return ObservationTable(
            names=tuple(names),
            columns=tuple(self.column(n) for n in names),
            encodings={n: v for n, v in self.encodings.items() if n in names},
        )

    @classmethod
    def from_columns(cls, data: Mapping[str, Sequence]) -> "ObservationTable":
        """Build a table; non-numeric columns are encoded by sorted label order."""
        names = tuple(data)
        columns = []
        encodings: dict[str, tuple[str, ...]] = {}
        for name in names:
            values = list(data[name])
            if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in values):
                columns.append(np.asarray(values, dtype=float))
            else:
                labels = tuple(sorted({str(v) for v in values}))
                index = {label: i for i, label in enumerate(labels)}
                columns.append(np.asarray([index[str(v)] for v in values], dtype=float))
                encodings[name] = labels
        return cls(names=names, columns=tuple(columns), encodings=encodings)


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    values: np.ndarray  # symmetric, unit diagonal, NaN marks undefined

    def entry(self, a: str, b: str) -> float:
        return float(self.values[self.labels.index(a), self.labels.index(b)])


@dataclass(frozen=True)
class ViolationStats:
    count: int
    fraction: float
    first_violation_index: int | None
    post_switch_fraction: float


def _tie_pair_count(sorted_values: np.ndarray) -> int:
    """Sum of t*(t-1)/2 over runs of equal values in a sorted array."""
    if len(sorted_values) == 0:
        return 0
    boundaries = np.flatnonzero(sorted_values[1:] != sorted_values[:-1])
    counts = np.diff(np.concatenate(([0], boundaries + 1, [len(sorted_values)])))
    return int(np.sum(counts * (counts - 1)) // 2)


def _inversions(ranks: np.ndarray, size: int) -> int:
    """Count pairs i<j with ranks[i] > ranks[j] via a Fenwick tree."""
    tree = [0] * (size + 1)
    total = 0
    seen = 0
    for r in ranks:
        # count previously inserted values <= r
        i = r + 1
        less_eq = 0
        while i > 0:
            less_eq += tree[i]
            i -= i & (-i)
        total += seen - less_eq
        seen += 1
        i = r + 1
        while i <= size:
            tree[i] += 1
            i += i & (-i)
    return total


def kendall_tau(x: Sequence, y: Sequence) -> float:
    """Tie-corrected Kendall rank correlation (tau-b).

    Returns (concordant - discordant) / sqrt((n0 - n1) * (n0 - n2)) where n0
    is the total pair count and n1, n2 the tie-pair counts of x and y. NaN
    marks the undefined case of a constant series. Pair counts are exact
    integers, so the result matches an all-pairs evaluation bit for bit.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    n = len(xa)
    if n < 2:
        raise ValueError("need at least two observations")

    order = np.lexsort((ya, xa))
    xs, ys = xa[order], ya[order]

    n0 = n * (n - 1) // 2
    n1 = _tie_pair_count(xs)
    n2 = _tie_pair_count(np.sort(ya))
    # joint ties: runs where both coordinates repeat
    joint = np.flatnonzero((xs[1:] != xs[:-1]) | (ys[1:] != ys[:-1]))
    counts = np.diff(np.concatenate(([0], joint + 1, [n])))
    n3 = int(np.sum(counts * (counts - 1)) // 2)

    denom_sq = (n0 - n1) * (n0 - n2)
    if denom_sq == 0:
        return float("nan")

    uniq = np.unique(ya)
    ranks = np.searchsorted(uniq, ys)
    # sorted by x with y ascending inside x-groups, so within-group pairs
    # never count as inversions
    discordant = _inversions(ranks.tolist(), len(uniq))
    con_minus_dis = n0 - n1 - n2 + n3 - 2 * discordant
    return con_minus_dis / math.sqrt(denom_sq)


def correlation_matrix(table: ObservationTable) -> CorrelationMatrix:
    """Pairwise tau over all columns; unit diagonal, NaN where undefined."""
    if len(table.names) < 2:
        raise ValueError("need at least two columns")
    k = len(table.names)
    values = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            tau = kendall_tau(table.columns[i], table.columns[j])
            values[i, j] = tau
            values[j, i] = tau
    return CorrelationMatrix(labels=table.names, values=values)


def violation_stats(trace: SimulationTrace, constraint_us: int) -> ViolationStats:
    """Constraint-violation summary of a trace.

    The post-switch fraction covers records arriving after the last switch
    took effect; with no switches it equals the whole-trace fraction.
    """
    if not trace.records:
        raise ValueError("empty trace")
    violated = [r.sojourn_us > constraint_us for r in trace.records]
    count = sum(violated)
    first = violated.index(True) if count else None

    cutoff = max((s.effective_us for s in trace.switches), default=None)
    if cutoff is None:
        post = trace.records
    else:
        post = [r for r in trace.records if r.stages[0].arrival_us > cutoff]
    post_violations = sum(1 for r in post if r.sojourn_us > constraint_us)
    post_fraction = post_violations / len(post) if post else 0.0

    return ViolationStats(
        count=count,
        fraction=count / len(trace.records),
        first_violation_index=first,
        post_switch_fraction=post_fraction,
    )


# ---------------------------------------------------------------------------
# CSV export / import
#
# Conventions: header row, RFC-4180 quoting, "\n" line endings, timestamps in
# integer microseconds, floats at six significant digits. Column orders are
# fixed and documented in the README.

TRACE_COLUMNS = (
    "request_id",
    "chain_id",
    "stage",
    "service_id",
    "variant_id",
    "arrival_us",
    "service_start_us",
    "service_end_us",
    "service_us",
    "queue_len_at_arrival",
    "sojourn_us",
    "violated",
    "qor",
)


def write_text(destination, text: str) -> int:
    data = text.encode("utf-8")
    if hasattr(destination, "write"):
        destination.write(text)
        return len(data)
    try:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {destination}: {exc}") from exc
    return len(data)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value,(int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return _FLOAT_FORMAT.format(value)
    return str(value)


def rows_to_csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def trace_rows(trace: SimulationTrace):
    """One row per request stage, in record (completion) order."""
    for record in trace.records:
        for k, st in enumerate(record.stages):
            yield (
                record.request_id,
                record.chain_id,
                k,
                st.service_id,
                st.variant_id,
                st.arrival_us,
                st.service_start_us,
                st.service_end_us,
                st.service_end_us - st.service_start_us,
                st.queue_length_at_arrival,
                record.sojourn_us,
                record.violated,
                record.qor,
            )


def export_csv(obj, destination) -> int:
    """Write a trace, correlation matrix, or observation table as CSV.

    Returns the number of bytes written. destination may be a path or a
    text file object.
    """
    if isinstance(obj, SimulationTrace):
        return write_text(destination, rows_to_csv(TRACE_COLUMNS, trace_rows(obj)))
    if isinstance(obj, CorrelationMatrix):
        header = ("label",) + obj.labels
        rows = (
            (label,) + tuple(obj.values[i]) for i, label in enumerate(obj.labels)
        )
        return write_text(destination, rows_to_csv(header, rows))
    if isinstance(obj, ObservationTable):
        header = [
            f"{name}:{'categorical' if name in obj.encodings else 'numeric'}"
            for name in obj.names
        ]
        decoded = [obj.labels(name, obj.column(name)) for name in obj.names]
        rows = zip(*decoded) if decoded else ()
        return write_text(destination, rows_to_csv(header, rows))
    raise TypeError(f"cannot export {type(obj).__name__}")


def export_long_format(matrix: CorrelationMatrix, destination) -> int:
    """Plot-ready (label_i, label_j, value) rows for every matrix cell."""
    rows = (
        (a, b, matrix.values[i, j])
        for i, a in enumerate(matrix.labels)
        for j, b in enumerate(matrix.labels)
    )
    return write_text(destination, rows_to_csv(("label_i", "label_j", "value"), rows))


def read_table_csv(path) -> ObservationTable:
    """Inverse of exporting an ObservationTable (name:kind header row)."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc

    names = []
    kinds = []
    for cell in header:
        name, _, kind = cell.rpartition(":")
        if not name:
            name, kind = kind, "numeric"
        names.append(name)
        kinds.append(kind)
    data: dict[str, list] = {name: [] for name in names}
    for row in rows:
        if len(row) != len(names):
            raise ValueError(f"{path}: row width {len(row)} != header width {len(names)}")
        for name, kind, cell in zip(names, kinds, row):
            data[name].append(float(cell) if kind != "categorical" else cell)
    return ObservationTable.from_columns(data)


def read_trace_table(path, columns: Sequence[str] | None = None) -> ObservationTable:
    """Load an exported trace CSV as an observation table.

    Numeric-looking columns are parsed as numbers, the rest become
    categoricals. columns, when given, selects and orders the result.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc

    data: dict[str, list] = {name: [] for name in header}
    for row in rows:
        for name, cell in zip(header, row):
            data[name].append(cell)

    parsed: dict[str, list] = {}
    for name, cells in data.items():
        try:
            parsed[name] = [float(c) for c in cells]
        except ValueError:
            parsed[name] = cells
    table = ObservationTable.from_columns(parsed)
    if columns is not None:
        table = table.select(columns)
    return table
