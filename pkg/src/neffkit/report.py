"""Distribution summaries of per-row n_eff and plot-data export.

A model is only as trustworthy as its thinnest region of support, so the
reporting layer summarizes how effective sample size is distributed over a
sample of patients: quantiles, a histogram, the harmonic mean (which for
development rows is exactly n/p), and counts below clinically chosen
thresholds. Development and validation samples can be compared
quantile-by-quantile.

Rows flagged as boundary (infinite n_eff) are counted separately and kept
out of every binned or interpolated statistic.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Mapping, Sequence

import numpy as np

from .errors import EmptyInput, GridOnNonTwoCovariateModel, UnknownKind
from .jsonio import format_float

if TYPE_CHECKING:  # pragma: no cover
    from .fit import FittedModel

QUANTILE_PERCENTS = (1, 5, 10, 25, 50, 75, 90, 95, 99)
DECILE_PERCENTS = (10, 20, 30, 40, 50, 60, 70, 80, 90)
DEFAULT_THRESHOLDS = (30.0,)
HISTOGRAM_BINS = 30
HISTOGRAM_UPPER_PERCENT = 99.5

PLOT_KINDS = ("heatmap-grid", "neff-vs-p", "dev-val-density", "histogram", "paired-model")


def _threshold_key(t: float) -> str:
    return format(float(t), "g")


@dataclass
class NeffDistribution:
    """Summary of per-row effective sample sizes.

    ``values`` keeps the input order (infinities included) so rows stay
    attributable; it is None for summaries reloaded without row detail.
    The histogram has len(edges) counts: the final count is the overflow
    bin above edges[-1]. ``n_below[t]`` counts finite rows strictly below
    the threshold t.
    """

    n: int
    quantiles: dict[str, float]
    harmonic_mean: float
    histogram_edges: list[float]
    histogram_counts: list[int]
    n_below: dict[str, int]
    boundary_count: int
    values: np.ndarray | None = field(default=None, repr=False)

    def to_document(self) -> dict[str, Any]:
        """The JSON shape served by the distribution endpoint."""
        return {
            "quantiles": dict(self.quantiles),
            "histogram": {
                "edges": list(self.histogram_edges),
                "counts": list(self.histogram_counts),
            },
            "harmonic_mean": self.harmonic_mean,
            "n_below": dict(self.n_below),
            "boundary_count": self.boundary_count,
        }

    def to_summary_obj(self) -> dict[str, Any]:
        """Persistable summary (adds n, drops per-row values)."""
        doc = self.to_document()
        doc["n"] = self.n
        return doc

    @classmethod
    def from_summary_obj(cls, obj: Mapping[str, Any]) -> "NeffDistribution":
        return cls(
            n=int(obj["n"]),
            quantiles={k: float(v) for k, v in obj["quantiles"].items()},
            harmonic_mean=float(obj["harmonic_mean"]),
            histogram_edges=[float(e) for e in obj["histogram"]["edges"]],
            histogram_counts=[int(c) for c in obj["histogram"]["counts"]],
            n_below={k: int(v) for k, v in obj["n_below"].items()},
            boundary_count=int(obj["boundary_count"]),
        )


def summarize(values, thresholds: Sequence[float] = DEFAULT_THRESHOLDS) -> NeffDistribution:
    """Build a NeffDistribution from raw per-row n_eff values.

    Quantiles use linear interpolation between order statistics (numpy's
    default, type 7). The histogram spans [0, 99.5th percentile] in 30
    equal bins plus one overflow bin; infinite values never enter bins.
    The harmonic mean treats an infinite value as contributing zero to
    the reciprocal sum.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise EmptyInput("no n_eff values to summarize")
    n = int(values.size)
    finite_mask = np.isfinite(values)
    finite = values[finite_mask]
    boundary_count = int(n - finite.size)

    if finite.size:
        qs = np.percentile(finite, QUANTILE_PERCENTS)
        quantiles = {str(p): float(q) for p, q in zip(QUANTILE_PERCENTS, qs)}
        upper = float(np.percentile(finite, HISTOGRAM_UPPER_PERCENT))
        if upper <= 0.0:
            upper = float(max(np.max(finite), 1.0))
        edges = np.linspace(0.0, upper, HISTOGRAM_BINS + 1)
        counts, _ = np.histogram(finite, bins=edges)
        overflow = int(np.count_nonzero(finite > edges[-1]))
        histogram_edges = [float(e) for e in edges]
        histogram_counts = [int(c) for c in counts] + [overflow]
        harmonic = n / float(np.sum(1.0 / finite))
        n_below = {
            _threshold_key(t): int(np.count_nonzero(finite < t)) for t in thresholds
        }
    else:
        # Every row at the boundary: nothing finite to bin or interpolate.
        quantiles = {}
        histogram_edges = [0.0, 1.0]
        histogram_counts = [0, 0]
        harmonic = float("inf")
        n_below = {_threshold_key(t): 0 for t in thresholds}

    return NeffDistribution(
        n=n,
        quantiles=quantiles,
        harmonic_mean=harmonic,
        histogram_edges=histogram_edges,
        histogram_counts=histogram_counts,
        n_below=n_below,
        boundary_count=boundary_count,
        values=values,
    )


def compare(dev: NeffDistribution, val: NeffDistribution) -> dict[str, Any]:
    """Validation-vs-development contrast.

    Reports the per-quantile difference (val minus dev), the fraction of
    validation rows below the development 5th percentile, and -- when both
    sides carry row values -- the fraction of validation values below each
    development decile (a stochastic-ordering profile).
    """
    if dev.n == 0 or val.n == 0:
        raise EmptyInput("cannot compare empty distributions")
    deltas = {}
    for key, dq in dev.quantiles.items():
        vq = val.quantiles.get(key)
        if vq is not None:
            deltas[key] = vq - dq

    result: dict[str, Any] = {"quantile_delta": deltas}
    if dev.values is not None and val.values is not None:
        dev_finite = dev.values[np.isfinite(dev.values)]
        val_finite = val.values[np.isfinite(val.values)]
        if dev_finite.size and val_finite.size:
            p5 = float(np.percentile(dev_finite, 5))
            result["frac_val_below_dev_p5"] = float(np.mean(val_finite < p5))
            deciles = np.percentile(dev_finite, DECILE_PERCENTS)
            result["frac_val_below_dev_decile"] = {
                str(p): float(np.mean(val_finite < d))
                for p, d in zip(DECILE_PERCENTS, deciles)
            }
    return result


@dataclass
class RowRecord:
    """One scored row of a report table."""

    row_id: int
    sample: str
    yhat: float
    n_eff: float
    annotations: tuple[str, ...] = ()

    def to_obj(self) -> dict[str, Any]:
        return {
            "row_id": self.row_id,
            "sample": self.sample,
            "yhat": self.yhat,
            "n_eff": None if not np.isfinite(self.n_eff) else self.n_eff,
            "annotations": list(self.annotations),
        }


@dataclass
class ReportBundle:
    """Everything one validation run produced, ready to serialize or plot."""

    model_name: str
    family: str
    thresholds: tuple[float, ...]
    dev: NeffDistribution
    val: NeffDistribution | None = None
    rows: tuple[RowRecord, ...] = ()
    comparison: dict[str, Any] | None = None
    model: "FittedModel | None" = field(default=None, repr=False)

    def to_obj(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "schema_version": 1,
            "model_name": self.model_name,
            "family": self.family,
            "thresholds": list(self.thresholds),
            "dev": self.dev.to_summary_obj(),
        }
        obj["val"] = self.val.to_summary_obj() if self.val is not None else None
        obj["comparison"] = self.comparison
        obj["rows"] = [r.to_obj() for r in self.rows]
        return obj


def _fmt_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format_float(v)


def _write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(c) for c in row])


def _grid_axis(options: Mapping[str, Any], name: str) -> np.ndarray:
    grid = options.get("grid", {})
    if name not in grid:
        raise ValueError(f"grid specification missing for covariate {name!r}")
    lo, hi, step = (float(v) for v in grid[name])
    if step <= 0 or hi < lo:
        raise ValueError(f"bad grid for {name!r}: ({lo}, {hi}, {step})")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _emit_heatmap_grid(bundle: ReportBundle, path, options: Mapping[str, Any]) -> None:
    from .neff import predict as _predict
    from .design import encode

    model = bundle.model
    if model is None or model.design_spec is None:
        raise ValueError("heatmap-grid needs the fitted model attached to the bundle")
    spec = model.design_spec
    if len(spec.covariates) not in (1, 2):
        raise GridOnNonTwoCovariateModel(
            f"grid export needs 1 or 2 covariates, model has {len(spec.covariates)}"
        )
    axes = [_grid_axis(options, c.name) for c in spec.covariates]
    names = [c.name for c in spec.covariates]
    rows = []
    if len(axes) == 1:
        points = [(v,) for v in axes[0]]
    else:
        points = [(a, b) for a in axes[0] for b in axes[1]]
    for point in points:
        record = dict(zip(names, point))
        pred = _predict(model, encode(spec, record))
        rows.append(list(point) + [pred.yhat, pred.n_eff])
    _write_csv(path, names + ["yhat", "n_eff"], rows)


def emit_plot_data(bundle: ReportBundle, kind: str, path, options: Mapping[str, Any] | None = None):
    """Write one plot-ready CSV. Columns by kind:

    - heatmap-grid:     one column per covariate, then yhat, n_eff
    - neff-vs-p:        row_id, yhat, n_eff
    - dev-val-density:  sample, n_eff
    - histogram:        sample, bin_left, bin_right, count
    - paired-model:     row_id, model, yhat, n_eff  (needs options["other"])

    Floats are written with enough digits to reparse exactly.
    """
    options = options or {}
    if kind == "heatmap-grid":
        _emit_heatmap_grid(bundle, path, options)
    elif kind == "neff-vs-p":
        if not bundle.rows:
            raise EmptyInput("report bundle has no per-row table")
        _write_csv(
            path,
            ["row_id", "yhat", "n_eff"],
            ([r.row_id, r.yhat, r.n_eff] for r in bundle.rows),
        )
    elif kind == "dev-val-density":
        if bundle.dev.values is None:
            raise EmptyInput("development per-row values are not available")
        rows = [("dev", v) for v in bundle.dev.values]
        if bundle.val is not None and bundle.val.values is not None:
            rows += [("val", v) for v in bundle.val.values]
        _write_csv(path, ["sample", "n_eff"], rows)
    elif kind == "histogram":
        rows = []
        for label, dist in (("dev", bundle.dev), ("val", bundle.val)):
            if dist is None:
                continue
            edges = dist.histogram_edges
            counts = dist.histogram_counts
            for i, count in enumerate(counts):
                left = edges[i]
                right = edges[i + 1] if i + 1 < len(edges) else float("inf")
                rows.append((label, left, right, count))
        _write_csv(path, ["sample", "bin_left", "bin_right", "count"], rows)
    elif kind == "paired-model":
        other = options.get("other")
        if other is None:
            raise ValueError("paired-model needs options['other'] = second ReportBundle")
        if not bundle.rows or not other.rows:
            raise EmptyInput("both bundles need per-row tables for a paired plot")
        rows = [(r.row_id, bundle.model_name, r.yhat, r.n_eff) for r in bundle.rows]
        rows += [(r.row_id, other.model_name, r.yhat, r.n_eff) for r in other.rows]
        _write_csv(path, ["row_id", "model", "yhat", "n_eff"], rows)
    else:
        raise UnknownKind(kind)
    return path
