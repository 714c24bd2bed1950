"""Exception hierarchy for neffkit.

Every error raised on purpose by this package derives from NeffkitError so
callers (and the CLI / API layers) can map failures to exit codes and HTTP
statuses without string matching.
"""

from __future__ import annotations


class NeffkitError(Exception):
    """Base class for all neffkit errors."""


# ---------------------------------------------------------------------------
# linear algebra kernels
# ---------------------------------------------------------------------------

class DimensionMismatch(NeffkitError):
    """Operand shapes are incompatible."""


class NonFiniteInput(NeffkitError):
    """NaN or Inf found in a numeric input; kernels refuse such values."""


class AsymmetricMatrix(NeffkitError):
    """A matrix required to be symmetric is not, beyond tolerance."""


class NotPositiveDefinite(NeffkitError):
    """Cholesky factorization hit a non-positive pivot.

    ``pivot`` is the zero-based index of the failing diagonal entry; it
    points at the column that is (numerically) linearly dependent on the
    previous ones.
    """

    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


# ---------------------------------------------------------------------------
# data ingestion and design encoding
# ---------------------------------------------------------------------------

class MissingColumn(NeffkitError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"column {name!r} not found in input")


class NonNumericCell(NeffkitError):
    def __init__(self, row: int, column: str, value: str = ""):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: not a number: {value!r}")


class MissingValue(NeffkitError):
    def __init__(self, row: int, column: str):
        self.row = row
        self.column = column
        super().__init__(f"row {row}, column {column!r}: empty cell")


class EmptyFile(NeffkitError):
    """File has no data rows (or no header at all)."""


class UnknownCovariate(NeffkitError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"covariate {name!r} is not part of the model")


class MissingCovariate(NeffkitError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"covariate {name!r} was not supplied")


class BinaryOutOfDomain(NeffkitError):
    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"binary covariate {name!r} must be 0 or 1, got {value!r}")


class InvalidOutcome(NeffkitError):
    """Outcome vector violates the family's domain (e.g. non-0/1 for binomial)."""


# ---------------------------------------------------------------------------
# model fitting
# ---------------------------------------------------------------------------

class RankDeficient(NeffkitError):
    """The (weighted) normal equations are singular.

    ``pivot`` points at the design column where factorization broke down.
    """

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(
            f"design matrix is rank deficient (factorization failed at column {pivot})"
        )


class TooFewRows(NeffkitError):
    def __init__(self, n: int, p: int):
        self.n = n
        self.p = p
        super().__init__(f"need more rows than parameters: n={n}, p={p}")


class NotConverged(NeffkitError):
    """Iterative fit did not converge.

    Carries the last iterate as ``model`` (with ``converged=False``) so
    callers that explicitly allow unconverged fits can still use it.
    """

    def __init__(self, message: str, model=None):
        self.model = model
        super().__init__(message)


class DegenerateDispersion(NeffkitError):
    """Residual variance is zero where a positive variance is required."""


# ---------------------------------------------------------------------------
# effective-sample-size queries
# ---------------------------------------------------------------------------

class BoundaryFlagPropagated(NeffkitError):
    """A boundary-flagged (infinite) effective sample size has no relative variance."""


class ResimulationError(NeffkitError):
    """Too many resimulation replicates failed to refit."""

    def __init__(self, failed: int, total: int):
        self.failed = failed
        self.total = total
        super().__init__(
            f"{failed} of {total} simulation replicates failed to converge (> 5% budget)"
        )


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

class EmptyInput(NeffkitError):
    """No values supplied where at least one is required."""


class GridOnNonTwoCovariateModel(NeffkitError):
    """Grid plot data needs a model with one or two covariates."""


class UnknownKind(NeffkitError):
    def __init__(self, kind: str):
        self.kind = kind
        super().__init__(f"unknown plot-data kind {kind!r}")


# ---------------------------------------------------------------------------
# model persistence
# ---------------------------------------------------------------------------

class SchemaVersionUnsupported(NeffkitError):
    def __init__(self, version):
        self.version = version
        super().__init__(f"unsupported model file schema_version: {version!r}")


class CorruptField(NeffkitError):
    def __init__(self, name: str, detail: str = ""):
        self.name = name
        suffix = f": {detail}" if detail else ""
        super().__init__(f"corrupt model file field {name!r}{suffix}")


class IoFailure(NeffkitError):
    """Reading or writing a file failed at the OS level."""


class UnconvergedWithoutOverride(NeffkitError):
    """Refusing to persist an unconverged model without an explicit override."""
