"""CSV ingestion and design-matrix encoding.

A model's column layout is fixed by a :class:`DesignSpec`: an intercept
column of ones first, then one column per covariate in declared order.
Continuous covariates are shifted by a stored centering constant so the
intercept lands at an interpretable reference patient; binary covariates
pass through untouched and must be exactly 0 or 1.

Ingestion is deliberately strict -- a missing or non-numeric cell is an
error, never an imputation -- because every downstream uncertainty number
is attributed back to input rows by position.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    BinaryOutOfDomain,
    EmptyFile,
    MissingColumn,
    MissingCovariate,
    MissingValue,
    NonNumericCell,
    UnknownCovariate,
)

COVARIATE_KINDS = ("continuous", "binary")


@dataclass(frozen=True)
class CovariateSpec:
    """One model column: its source name, coding kind, and centering shift."""

    name: str
    kind: str = "continuous"
    center: float = 0.0

    def __post_init__(self):
        if self.kind not in COVARIATE_KINDS:
            raise ValueError(f"covariate kind must be one of {COVARIATE_KINDS}, got {self.kind!r}")
        if self.kind == "binary" and self.center != 0.0:
            raise ValueError(f"binary covariate {self.name!r} cannot be centered")


@dataclass(frozen=True)
class DesignSpec:
    """Ordered covariate list; the encoded matrix is [1, covariates...]."""

    covariates: tuple[CovariateSpec, ...]

    def __post_init__(self):
        names = [c.name for c in self.covariates]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate covariate names in design: {names}")
        object.__setattr__(self, "covariates", tuple(self.covariates))

    @property
    def p(self) -> int:
        return 1 + len(self.covariates)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.covariates)

    def column_labels(self) -> tuple[str, ...]:
        return ("(intercept)",) + self.names


@dataclass
class Dataset:
    """Rectangular all-numeric table, column-addressable, row order preserved."""

    columns: tuple[str, ...]
    data: dict[str, np.ndarray] = field(repr=False)
    n: int = 0

    def column(self, name: str) -> np.ndarray:
        try:
            return self.data[name]
        except KeyError:
            raise MissingColumn(name) from None


def read_csv(path, schema: Iterable[str]) -> Dataset:
    """Parse the named columns of a comma-separated file into float64 arrays.

    The first line is the header. Every requested column must exist and be
    fully populated with numbers; the first offending cell is reported with
    its 1-based data-row index.
    """
    wanted = list(dict.fromkeys(schema))
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} has no header row") from None
        header = [h.strip() for h in header]
        positions = {}
        for name in wanted:
            try:
                positions[name] = header.index(name)
            except ValueError:
                raise MissingColumn(name) from None

        cols: dict[str, list[float]] = {name: [] for name in wanted}
        row_num = 0
        for raw in reader:
            if not raw or (len(raw) == 1 and raw[0].strip() == ""):
                continue  # ignore blank lines
            row_num += 1
            for name in wanted:
                idx = positions[name]
                cell = raw[idx].strip() if idx < len(raw) else ""
                if cell == "":
                    raise MissingValue(row_num, name)
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise NonNumericCell(row_num, name, cell) from None

    if row_num == 0:
        raise EmptyFile(f"{path} contains a header but no data rows")
    data = {name: np.asarray(values, dtype=np.float64) for name, values in cols.items()}
    return Dataset(columns=tuple(wanted), data=data, n=row_num)


def _binary_value(name: str, value: float) -> float:
    if value == 0.0 or value == 1.0:
        return float(value)
    raise BinaryOutOfDomain(name, value)


def encode(spec: DesignSpec, record: Mapping[str, float]) -> np.ndarray:
    """Turn one raw covariate map into a design row (1, v1 - c1, ...).

    Strict on both sides: every covariate in the spec must appear in the
    record, and the record may not carry names the spec does not know.
    """
    known = set(spec.names)
    for key in record:
        if key not in known:
            raise UnknownCovariate(key)
    row = np.empty(spec.p, dtype=np.float64)
    row[0] = 1.0
    for j, cov in enumerate(spec.covariates, start=1):
        if cov.name not in record:
            raise MissingCovariate(cov.name)
        value = float(record[cov.name])
        if cov.kind == "binary":
            row[j] = _binary_value(cov.name, value)
        else:
            row[j] = value - cov.center
    return row


def build_design(spec: DesignSpec, data: Dataset) -> np.ndarray:
    """Encode every dataset row; row i of the result is encode(spec, row i)."""
    out = np.empty((data.n, spec.p), dtype=np.float64)
    out[:, 0] = 1.0
    for j, cov in enumerate(spec.covariates, start=1):
        col = data.column(cov.name)
        if cov.kind == "binary":
            bad = np.nonzero((col != 0.0) & (col != 1.0))[0]
            if bad.size:
                raise BinaryOutOfDomain(cov.name, float(col[bad[0]]))
            out[:, j] = col
        else:
            out[:, j] = col - cov.center
    return out


def marginal_means(data: Dataset, names: Iterable[str]) -> dict[str, float]:
    """Arithmetic mean of each named raw column (the usual centering choice)."""
    return {name: float(np.mean(data.column(name))) for name in names}


def detect_kinds(
    data: Dataset,
    names: Iterable[str],
    binary: Iterable[str] = (),
    continuous: Iterable[str] = (),
) -> dict[str, str]:
    """Classify covariates: values within {0,1} read as binary toggles.

    Explicit overrides win; a column forced binary must actually live in
    {0,1} (checked later by build_design).
    """
    force_bin = set(binary)
    force_cont = set(continuous)
    both = force_bin & force_cont
    if both:
        raise ValueError(f"covariates marked both binary and continuous: {sorted(both)}")
    kinds = {}
    for name in names:
        if name in force_bin:
            kinds[name] = "binary"
        elif name in force_cont:
            kinds[name] = "continuous"
        else:
            col = data.column(name)
            kinds[name] = "binary" if np.all((col == 0.0) | (col == 1.0)) else "continuous"
    return kinds
