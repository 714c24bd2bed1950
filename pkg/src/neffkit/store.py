"""Save and reload fitted models as self-contained JSON documents.

A model file carries everything needed to score a new patient --
coefficients, their covariance, the covariate coding rules, and the
development n_eff distribution -- so predictions never require the
original data. Numbers are written in decimal with 17 significant
digits, which reproduces every float64 bit-for-bit on reload; the file
is human-inspectable and diffs cleanly.

Writes go through a temp file and an atomic rename so a crashed process
never leaves a half-written model behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from typing import Any, Mapping

import numpy as np

from . import jsonio, kernels
from .design import CovariateSpec, DesignSpec
from .errors import (
    CorruptField,
    IoFailure,
    NotPositiveDefinite,
    SchemaVersionUnsupported,
    UnconvergedWithoutOverride,
)
from .families import GAUSSIAN, FAMILIES
from .fit import FittedModel
from .report import NeffDistribution

SCHEMA_VERSION = 1

# Sorted per-row development values are persisted up to this many rows;
# beyond it the percentile lookup falls back to quantile interpolation.
SORTED_VECTOR_LIMIT = 100_000

# Tolerance for the symmetry check applied to a covariance read from disk.
LOAD_SYMMETRY_ATOL = 1e-9


def _covariate_entry(model: FittedModel, cov: CovariateSpec) -> dict[str, Any]:
    entry: dict[str, Any] = {"name": cov.name, "kind": cov.kind, "center": cov.center}
    stats = (model.covariate_stats or {}).get(cov.name)
    if stats:
        entry.update(
            dev_min=stats.get("dev_min"),
            dev_max=stats.get("dev_max"),
            dev_mean=stats.get("dev_mean"),
        )
    return entry


def model_to_obj(model: FittedModel) -> dict[str, Any]:
    """The on-disk document; field order is fixed for reproducible files."""
    if model.design_spec is None:
        raise ValueError("cannot persist a model without a design spec")
    sorted_vec = model.dev_neff_sorted
    if sorted_vec is not None and sorted_vec.shape[0] > SORTED_VECTOR_LIMIT:
        sorted_vec = None
    return {
        "schema_version": SCHEMA_VERSION,
        "model_name": model.model_name,
        "family": model.family.name,
        "design_spec": {
            "intercept": True,
            "covariates": [_covariate_entry(model, c) for c in model.design_spec.covariates],
        },
        "beta": model.beta,
        "cov_beta": model.cov_beta,
        "unscaled_xtx_inverse": model.unscaled_xtx_inverse,
        "dispersion": model.dispersion,
        "n_dev": model.n_dev,
        "deviance": model.deviance,
        "converged": model.converged,
        "warnings": list(model.warnings),
        "thresholds": list(model.thresholds),
        "dev_neff_summary": model.dev_neff.to_summary_obj() if model.dev_neff else None,
        "dev_neff_sorted": sorted_vec,
    }


def save(model: FittedModel, path, allow_unconverged: bool = False) -> None:
    if not model.converged and not allow_unconverged:
        raise UnconvergedWithoutOverride(
            "refusing to persist an unconverged fit (pass allow_unconverged to override)"
        )
    payload = jsonio.dumps(model_to_obj(model), indent=2) + "\n"
    directory = os.path.dirname(os.fspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".model-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            os.unlink(tmp)
            raise
    except OSError as err:
        raise IoFailure(f"could not write model file {path}: {err}") from err


def _field(obj: Mapping[str, Any], name: str):
    if name not in obj:
        raise CorruptField(name, "missing")
    return obj[name]


def _float_vector(obj, name: str) -> np.ndarray:
    try:
        vec = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise CorruptField(name, "not a numeric vector") from None
    if vec.ndim != 1 or not np.all(np.isfinite(vec)):
        raise CorruptField(name, "not a finite 1-d vector")
    return np.ascontiguousarray(vec)


def _float_matrix(obj, name: str, p: int) -> np.ndarray:
    try:
        mat = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError):
        raise CorruptField(name, "not a numeric matrix") from None
    if mat.shape != (p, p) or not np.all(np.isfinite(mat)):
        raise CorruptField(name, f"expected a finite {p}x{p} matrix")
    if np.max(np.abs(mat - mat.T)) > LOAD_SYMMETRY_ATOL * max(1.0, float(np.max(np.abs(mat)))):
        raise CorruptField(name, "not symmetric")
    return np.ascontiguousarray(mat)


def load(path) -> FittedModel:
    """Reload a model file, re-validating every invariant the fitters establish."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise  # a wrong path is a user error, not an I/O fault
    except OSError as err:
        raise IoFailure(f"could not read model file {path}: {err}") from err
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise CorruptField("document", f"not valid JSON: {err}") from None
    if not isinstance(obj, dict):
        raise CorruptField("document", "top level is not an object")

    version = _field(obj, "schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(version)

    family_name = _field(obj, "family")
    if family_name not in FAMILIES:
        raise CorruptField("family", f"unknown family {family_name!r}")
    family = FAMILIES[family_name]

    ds = _field(obj, "design_spec")
    try:
        covariates = tuple(
            CovariateSpec(name=c["name"], kind=c["kind"], center=float(c["center"]))
            for c in ds["covariates"]
        )
        design_spec = DesignSpec(covariates=covariates)
    except (KeyError, TypeError, ValueError) as err:
        raise CorruptField("design_spec", str(err)) from None

    beta = _float_vector(_field(obj, "beta"), "beta")
    p = beta.shape[0]
    if p != design_spec.p:
        raise CorruptField("beta", f"length {p} does not match design p={design_spec.p}")
    cov_beta = _float_matrix(_field(obj, "cov_beta"), "cov_beta", p)

    dispersion = _field(obj, "dispersion")
    if not isinstance(dispersion, (int, float)) or dispersion < 0:
        raise CorruptField("dispersion", "must be a nonnegative number")
    dispersion = float(dispersion)

    if dispersion > 0:
        try:
            kernels.cholesky(cov_beta, check=False)
        except NotPositiveDefinite:
            raise CorruptField("cov_beta", "not positive definite") from None

    unscaled = obj.get("unscaled_xtx_inverse")
    if unscaled is not None:
        if family_name != GAUSSIAN.name:
            raise CorruptField("unscaled_xtx_inverse", "only valid for gaussian models")
        unscaled = _float_matrix(unscaled, "unscaled_xtx_inverse", p)

    n_dev = _field(obj, "n_dev")
    if not isinstance(n_dev, int) or n_dev < 1:
        raise CorruptField("n_dev", "must be a positive integer")

    summary = obj.get("dev_neff_summary")
    dev_neff = None
    if summary is not None:
        try:
            dev_neff = NeffDistribution.from_summary_obj(summary)
        except (KeyError, TypeError, ValueError) as err:
            raise CorruptField("dev_neff_summary", str(err)) from None

    sorted_obj = obj.get("dev_neff_sorted")
    dev_sorted = None
    if sorted_obj is not None:
        dev_sorted = np.asarray(
            [np.inf if v is None else float(v) for v in sorted_obj], dtype=np.float64
        )
        if dev_sorted.ndim != 1 or np.any(np.diff(dev_sorted) < 0):
            raise CorruptField("dev_neff_sorted", "must be a nondecreasing vector")

    deviance = _field(obj, "deviance")
    if not isinstance(deviance, (int, float)) or isinstance(deviance, bool):
        raise CorruptField("deviance", "must be a number")

    thresholds = tuple(float(t) for t in obj.get("thresholds", [30.0]))
    model = FittedModel(
        family=family,
        beta=beta,
        cov_beta=cov_beta,
        dispersion=dispersion,
        n_dev=n_dev,
        deviance=float(deviance),
        converged=bool(_field(obj, "converged")),
        design_spec=design_spec,
        unscaled_xtx_inverse=unscaled,
        warnings=tuple(obj.get("warnings", ())),
        dev_neff=dev_neff,
        dev_neff_sorted=dev_sorted,
        covariate_stats=_stats_from_design(ds),
        model_name=str(obj.get("model_name", "model")),
        thresholds=thresholds,
    )
    model.validate()
    return model


def _stats_from_design(ds: Mapping[str, Any]) -> dict[str, dict[str, float]]:
    stats = {}
    for c in ds.get("covariates", ()):
        if "dev_min" in c:
            stats[c["name"]] = {
                "dev_min": float(c["dev_min"]),
                "dev_max": float(c["dev_max"]),
                "dev_mean": float(c["dev_mean"]),
            }
    return stats
