"""End-to-end pipelines shared by the CLI and the HTTP API.

Keeping prediction assembly in one place is a correctness feature, not
just tidiness: the command line and the API must return bit-identical
numbers for the same model and query, so they call the same
:func:`predict_record`.
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .design import (
    Dataset,
    CovariateSpec,
    DesignSpec,
    build_design,
    detect_kinds,
    encode,
    marginal_means,
)
from .errors import NotConverged
from .families import Family, get_family
from .fit import FittedModel, fit_irls, fit_ols, with_decorations
from .neff import (
    annotations_for,
    dev_percentile,
    neff_rows,
    predict,
    query_neff_sweep,
)
from .report import (
    DEFAULT_THRESHOLDS,
    NeffDistribution,
    ReportBundle,
    RowRecord,
    compare,
    summarize,
)

# CLI-friendly aliases accepted anywhere a family is named.
FAMILY_ALIASES = {
    "gaussian": "gaussian-identity",
    "linear": "gaussian-identity",
    "binomial": "binomial-logit",
    "logistic": "binomial-logit",
    "poisson": "poisson-log",
}


def resolve_family(name: str) -> Family:
    return get_family(FAMILY_ALIASES.get(name, name))


def make_design_spec(
    data: Dataset,
    predictors: Sequence[str],
    center: str = "none",
    binary: Iterable[str] = (),
    continuous: Iterable[str] = (),
) -> DesignSpec:
    """Classify covariates and choose centering constants from the data.

    center="auto" centers continuous covariates at their development
    marginal means (binary covariates are never shifted); "none" keeps raw
    units everywhere.
    """
    if center not in ("none", "auto"):
        raise ValueError(f"center must be 'none' or 'auto', got {center!r}")
    kinds = detect_kinds(data, predictors, binary=binary, continuous=continuous)
    centers = {name: 0.0 for name in predictors}
    if center == "auto":
        cont = [n for n in predictors if kinds[n] == "continuous"]
        centers.update(marginal_means(data, cont))
    return DesignSpec(
        covariates=tuple(
            CovariateSpec(name=n, kind=kinds[n], center=centers[n]) for n in predictors
        )
    )


def _covariate_stats(data: Dataset, names: Iterable[str]) -> dict[str, dict[str, float]]:
    stats = {}
    for name in names:
        col = data.column(name)
        stats[name] = {
            "dev_min": float(np.min(col)),
            "dev_max": float(np.max(col)),
            "dev_mean": float(np.mean(col)),
        }
    return stats


def decorate_model(
    model: FittedModel,
    X_dev: np.ndarray,
    data: Dataset,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    model_name: str = "model",
) -> FittedModel:
    """Attach the development n_eff distribution and covariate ranges.

    The distribution comes from the vectorized leverage sweep; the sorted
    per-row vector comes from the scalar query path so that a later query
    landing exactly on a development row ties with it bit-for-bit.
    """
    _, dev_values = neff_rows(model, X_dev)
    dist = summarize(dev_values, thresholds)
    names = model.design_spec.names if model.design_spec else ()
    return with_decorations(
        model,
        dev_neff=dist,
        dev_neff_sorted=np.sort(query_neff_sweep(model, X_dev)),
        covariate_stats=_covariate_stats(data, names),
        model_name=model_name,
        thresholds=tuple(float(t) for t in thresholds),
    )


def fit_model(
    data: Dataset,
    outcome: str,
    predictors: Sequence[str],
    family: str,
    center: str = "none",
    binary: Iterable[str] = (),
    continuous: Iterable[str] = (),
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    model_name: str = "model",
) -> FittedModel:
    """Fit one model from a parsed dataset and decorate it for reporting.

    On non-convergence the NotConverged exception carries the decorated
    partial fit, so callers holding an explicit override can still save it.
    """
    fam = resolve_family(family)
    spec = make_design_spec(data, predictors, center=center, binary=binary, continuous=continuous)
    X = build_design(spec, data)
    y = data.column(outcome)
    fam.validate_outcome(y)
    try:
        if fam.name == "gaussian-identity":
            model = fit_ols(X, y, design_spec=spec)
        else:
            model = fit_irls(X, y, fam, design_spec=spec)
    except NotConverged as err:
        if err.model is not None:
            err.model = decorate_model(err.model, X, data, thresholds, model_name)
        raise
    return decorate_model(model, X, data, thresholds, model_name)


def _display_neff(n_eff: float, n_dev: int, boundary: bool) -> str:
    if boundary or math.isinf(n_eff):
        return "inf"
    if n_eff > n_dev:
        return f"> {n_dev}"
    return str(int(round(n_eff)))


def _percentile_from_quantiles(dist: NeffDistribution, n_eff: float) -> float:
    """Fallback percentile by linear interpolation through stored quantiles."""
    pairs = sorted((float(v), float(k)) for k, v in dist.quantiles.items())
    if not pairs:
        return float("nan")
    values = [v for v, _ in pairs]
    pcts = [p for _, p in pairs]
    if n_eff < values[0]:
        return pcts[0]
    if n_eff >= values[-1]:
        return pcts[-1]
    return float(np.interp(n_eff, values, pcts))


def predict_record(model: FittedModel, covariates: Mapping[str, float]) -> dict[str, Any]:
    """Score one patient; the single payload both the CLI and API return.

    n_eff is null (None) exactly when the prediction is boundary-flagged;
    the raw float is otherwise unrounded. n_eff_display is the
    communication form: nearest integer, or "> n_dev" when the value
    exceeds the development sample size.
    """
    spec = model.design_spec
    if spec is None:
        raise ValueError("model has no design spec; cannot encode named covariates")
    x = encode(spec, covariates)
    pred = predict(model, x)

    if model.dev_neff_sorted is not None:
        pct = dev_percentile(model.dev_neff_sorted, pred.n_eff)
    elif model.dev_neff is not None:
        pct = _percentile_from_quantiles(model.dev_neff, pred.n_eff)
    else:
        pct = None

    return {
        "yhat": pred.yhat,
        "eta": pred.eta,
        "se_pred": pred.se_pred,
        "rel_var": pred.rel_var,
        "n_eff": None if pred.boundary else pred.n_eff,
        "n_eff_display": _display_neff(pred.n_eff, model.n_dev, pred.boundary),
        "dev_percentile": pct,
        "per_hundred": int(round(pred.yhat * 100.0)),
        "annotations": list(pred.annotations),
    }


def _dev_distribution(model: FittedModel, thresholds: tuple[float, ...]) -> NeffDistribution:
    """Development distribution for reporting.

    The summary embedded at fit time is canonical (its quantiles were
    computed from the leverage sweep, the same arithmetic used for
    validation rows). Overridden thresholds only recount n_below, using
    the persisted sorted vector; row values for comparison fractions are
    filled in from the same vector when available.
    """
    dist = model.dev_neff
    if dist is None:
        if model.dev_neff_sorted is None:
            raise ValueError("model carries no development n_eff information")
        return summarize(model.dev_neff_sorted, thresholds)
    values = dist.values if dist.values is not None else model.dev_neff_sorted
    n_below = dist.n_below
    if thresholds != model.thresholds:
        if values is None:
            raise ValueError("threshold override needs per-row development values")
        finite = values[np.isfinite(values)]
        n_below = {format(float(t), "g"): int(np.count_nonzero(finite < t)) for t in thresholds}
    return replace(dist, n_below=n_below, values=values)


def validation_report(
    model: FittedModel,
    data: Dataset | None = None,
    thresholds: Sequence[float] | None = None,
) -> ReportBundle:
    """Summarize dev n_eff and, when validation data is given, contrast it.

    Validation rows are scored exactly like new patients; their n_eff
    values get their own distribution, a per-row table, and a comparison
    block against the development distribution.
    """
    thresholds = tuple(thresholds) if thresholds is not None else model.thresholds
    dev = _dev_distribution(model, thresholds)
    bundle = ReportBundle(
        model_name=model.model_name,
        family=model.family.name,
        thresholds=thresholds,
        dev=dev,
        model=model,
    )
    if data is None:
        return bundle

    spec = model.design_spec
    X_val = build_design(spec, data)
    yhat, n_eff = neff_rows(model, X_val)
    val = summarize(n_eff, thresholds)
    rows = []
    for i in range(data.n):
        rows.append(
            RowRecord(
                row_id=i + 1,
                sample="val",
                yhat=float(yhat[i]),
                n_eff=float(n_eff[i]),
                annotations=annotations_for(float(n_eff[i]), model.n_dev),
            )
        )
    bundle.val = val
    bundle.rows = tuple(rows)
    bundle.comparison = compare(dev, val)
    return bundle
