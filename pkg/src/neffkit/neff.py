"""Effective sample size, relative variance, and leverages.

The central quantity: for a patient with encoded covariate row x, the
effective sample size n_eff is the size of a hypothetical group of
identical patients whose observed outcome mean would be exactly as
uncertain as the model's prediction for x,

    n_eff = Var(Y | eta) / Var(yhat).

For a linear model this collapses to 1 / (x'(X'X)^{-1} x) -- a pure
design quantity, independent of the outcomes -- and equals the inverse
leverage at development rows. For a GLM the same ratio is built from the
delta-method prediction variance x'Cov(beta)x * (d g^{-1}/d eta)^2 and the
family's conditional variance at the predicted mean.

A simulation estimator (refit on outcomes redrawn from the fitted model)
is included as an independent check for settings without a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BoundaryFlagPropagated,
    DegenerateDispersion,
    DimensionMismatch,
    NeffkitError,
    ResimulationError,
)
from .families import GAUSSIAN
from .fit import FittedModel, fit_irls, fit_ols, weight_matrix

# A binomial mean this close to 0 or 1 has conditional variance at the
# resolution of float64; the prediction is treated as sitting on the
# outcome boundary and n_eff is reported as infinite, flagged, not huge.
BOUNDARY_TOL = 1e-12

ANNOTATION_BOUNDARY = "boundary"
ANNOTATION_EXCEEDS_DEV_N = "exceeds_dev_n"
ANNOTATION_EXTRAPOLATION = "extrapolation"


@dataclass(frozen=True)
class PredictionWithUncertainty:
    """One patient's prediction and every uncertainty number derived from it.

    ``n_eff`` is math.inf exactly when ``boundary`` is set; downstream
    serialization turns that into an explicit null-plus-flag, never a
    silently enormous number.
    """

    eta: float
    yhat: float
    var_pred: float
    se_pred: float
    rel_var: float
    n_eff: float
    cond_var: float
    annotations: tuple[str, ...] = ()

    @property
    def boundary(self) -> bool:
        return ANNOTATION_BOUNDARY in self.annotations


@dataclass(frozen=True)
class LeverageSet:
    """Per-development-row leverages h and their inverses (row-wise n_eff)."""

    h: np.ndarray
    n_eff: np.ndarray

    def __len__(self) -> int:
        return int(self.h.shape[0])


def _check_x(model: FittedModel, x_new) -> np.ndarray:
    x = np.ascontiguousarray(x_new, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.p:
        raise DimensionMismatch(f"query row has shape {x.shape}, model expects ({model.p},)")
    if not np.all(np.isfinite(x)):
        raise DimensionMismatch("query row contains non-finite values")
    return x


def annotations_for(n_eff: float, n_dev: int) -> tuple[str, ...]:
    """Flags attached to a single n_eff value, in fixed order."""
    notes = []
    if math.isinf(n_eff):
        notes.append(ANNOTATION_BOUNDARY)
    else:
        if n_eff > n_dev:
            notes.append(ANNOTATION_EXCEEDS_DEV_N)
        if n_eff < 1.0:
            notes.append(ANNOTATION_EXTRAPOLATION)
    return tuple(notes)


def _design_relvar(model: FittedModel, x: np.ndarray) -> float:
    """x'(X'X)^{-1}x for a gaussian model, robust to a zero dispersion."""
    if model.unscaled_xtx_inverse is not None:
        return kernels.quadratic_form(model.unscaled_xtx_inverse, x)
    if model.dispersion == 0.0:
        raise DegenerateDispersion(
            "dispersion is zero and the unscaled (X'X)^{-1} was not stored"
        )
    return kernels.quadratic_form(model.cov_beta, x) / model.dispersion


def neff_linear(model: FittedModel, x_new) -> PredictionWithUncertainty:
    """Linear-model effective sample size: n_eff = 1 / (x'(X'X)^{-1} x).

    Outcome-free by construction -- only the design enters -- which is why
    the computation goes through the unscaled (X'X)^{-1} and survives a
    perfect fit with zero residual variance.
    """
    if model.family.name != GAUSSIAN.name:
        raise ValueError(f"neff_linear requires a gaussian model, got {model.family.name}")
    x = _check_x(model, x_new)
    rel_var = _design_relvar(model, x)
    eta = float(x @ model.beta)
    n_eff = 1.0 / rel_var
    var_pred = rel_var * model.dispersion
    return PredictionWithUncertainty(
        eta=eta,
        yhat=eta,
        var_pred=var_pred,
        se_pred=math.sqrt(var_pred),
        rel_var=rel_var,
        n_eff=n_eff,
        cond_var=model.dispersion,
        annotations=annotations_for(n_eff, model.n_dev),
    )


def neff_glm(model: FittedModel, x_new) -> PredictionWithUncertainty:
    """GLM effective sample size via the delta method.

    n_eff = Var(Y|eta) / [x'Cov(beta)x * (d g^{-1}/d eta)^2]; for the
    binomial-logit family both the derivative and the conditional variance
    are p(1-p), so this reduces to 1/(x'Cov(beta)x * p(1-p)). Gaussian
    models fall through to :func:`neff_linear` (same value, exactly).
    """
    if model.family.name == GAUSSIAN.name:
        return neff_linear(model, x_new)
    x = _check_x(model, x_new)
    family = model.family
    eta = float(x @ model.beta)
    yhat = float(family.inverse_link(np.float64(eta)))
    q = kernels.quadratic_form(model.cov_beta, x)
    deriv = float(family.mean_derivative(np.float64(eta), np.float64(yhat)))
    cond_var = float(family.conditional_variance(np.float64(yhat), model.dispersion))
    var_pred = q * deriv * deriv

    at_boundary = (
        family.name == "binomial-logit"
        and (yhat <= BOUNDARY_TOL or yhat >= 1.0 - BOUNDARY_TOL)
    ) or cond_var <= 0.0
    if at_boundary:
        return PredictionWithUncertainty(
            eta=eta,
            yhat=yhat,
            var_pred=var_pred,
            se_pred=math.sqrt(var_pred),
            rel_var=0.0,
            n_eff=math.inf,
            cond_var=cond_var,
            annotations=(ANNOTATION_BOUNDARY,),
        )

    rel_var = var_pred / cond_var
    n_eff = 1.0 / rel_var
    return PredictionWithUncertainty(
        eta=eta,
        yhat=yhat,
        var_pred=var_pred,
        se_pred=math.sqrt(var_pred),
        rel_var=rel_var,
        n_eff=n_eff,
        cond_var=cond_var,
        annotations=annotations_for(n_eff, model.n_dev),
    )


def predict(model: FittedModel, x_new) -> PredictionWithUncertainty:
    """Family dispatch: gaussian uses the exact linear form, others the GLM form."""
    if model.family.name == GAUSSIAN.name:
        return neff_linear(model, x_new)
    return neff_glm(model, x_new)


def relvar(pred: PredictionWithUncertainty) -> float:
    """Relative variance 1/n_eff; refuses a boundary-flagged prediction."""
    if pred.boundary:
        raise BoundaryFlagPropagated(
            "prediction sits on the outcome boundary; its relative variance is degenerate"
        )
    return pred.rel_var


def leverages(model: FittedModel, X_dev) -> LeverageSet:
    """Diagonal of the (weighted) hat matrix, one row at a time.

    gaussian: h_i = x_i'(X'X)^{-1} x_i; otherwise h_i = v_i x_i'(X'VX)^{-1} x_i
    with v the working weights at the fitted coefficients. The n-by-n hat
    matrix itself is never formed. Row-wise n_eff is 1/h.
    """
    X_dev = np.ascontiguousarray(X_dev, dtype=np.float64)
    if X_dev.ndim != 2 or X_dev.shape[1] != model.p:
        raise DimensionMismatch(f"development design {X_dev.shape} does not match p={model.p}")
    if model.family.name == GAUSSIAN.name:
        if model.unscaled_xtx_inverse is not None:
            h = kernels.row_quad_forms(X_dev, model.unscaled_xtx_inverse)
        else:
            if model.dispersion == 0.0:
                raise DegenerateDispersion(
                    "dispersion is zero and the unscaled (X'X)^{-1} was not stored"
                )
            h = kernels.row_quad_forms(X_dev, model.cov_beta) / model.dispersion
    else:
        w = weight_matrix(X_dev, model.beta, model.family, model.dispersion)
        h = kernels.row_quad_forms(X_dev, model.cov_beta, w)
    with np.errstate(divide="ignore"):
        n_eff = 1.0 / h
    return LeverageSet(h=h, n_eff=n_eff)


def neff_rows(model: FittedModel, X) -> tuple[np.ndarray, np.ndarray]:
    """Per-row (yhat, n_eff) for a block of encoded rows.

    This is the leverage sweep with boundary handling layered on: the same
    vectorized arithmetic scores the development rows at fit time and the
    validation rows at report time, so identical inputs produce identical
    values on both sides of a comparison. Boundary rows (binomial mean at
    0 or 1 to within BOUNDARY_TOL) come back as inf.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    lev = leverages(model, X)
    eta = X @ model.beta
    family = model.family
    if family.name == GAUSSIAN.name:
        return eta, lev.n_eff
    mu = family.inverse_link(eta)
    cond = family.conditional_variance(mu, model.dispersion)
    if family.name == "binomial-logit":
        on_edge = (mu <= BOUNDARY_TOL) | (mu >= 1.0 - BOUNDARY_TOL) | (cond <= 0.0)
    else:
        on_edge = cond <= 0.0
    n_eff = np.where(on_edge, np.inf, lev.n_eff)
    return mu, n_eff


def query_neff_sweep(model: FittedModel, X) -> np.ndarray:
    """Per-row n_eff computed exactly as single-patient queries compute it.

    Slower than :func:`neff_rows` (one scalar evaluation per row) but
    bit-identical to :func:`predict` on the same row, which is what makes
    tie-counting between a stored development vector and a later query
    well-defined. Used once per fit to build the persisted sorted vector.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.p:
        raise DimensionMismatch(f"query block {X.shape} does not match p={model.p}")
    return np.asarray([predict(model, X[i]).n_eff for i in range(X.shape[0])])


def dev_percentile(dev_sorted: np.ndarray, n_eff: float) -> float:
    """Share of development rows with n_eff at or below the query's, in percent."""
    n = dev_sorted.shape[0]
    if n == 0:
        raise ValueError("empty development n_eff vector")
    count = int(np.searchsorted(dev_sorted, n_eff, side="right"))
    return 100.0 * count / n


def neff_simulated(
    model: FittedModel,
    X_dev,
    x_new,
    B: int = 2000,
    seed: int = 20240101,
) -> float:
    """Simulation estimate of n_eff: refit on redrawn outcomes, compare variances.

    For each replicate b, outcomes are drawn from the fitted conditional
    distribution at every development row, the same family is refit, and the
    prediction at x_new recorded. The estimate is

        Var(Y | eta_new) / sample-variance of the replicate predictions.

    Each replicate uses an independent RNG stream keyed by (seed, b), so the
    result does not depend on evaluation order. Replicates whose refit fails
    are dropped; more than 5% dropped is an error.
    """
    if B < 100:
        raise ValueError(f"B must be at least 100, got {B}")
    X_dev = np.ascontiguousarray(X_dev, dtype=np.float64)
    x = _check_x(model, x_new)
    family = model.family
    mu_dev = family.inverse_link(X_dev @ model.beta)
    gaussian = family.name == GAUSSIAN.name

    yhats = np.empty(B, dtype=np.float64)
    failed = 0
    kept = 0
    for b in range(B):
        rng = np.random.default_rng([seed, b])
        y_b = family.simulate(rng, mu_dev, model.dispersion)
        try:
            if gaussian:
                refit = fit_ols(X_dev, y_b)
            else:
                refit = fit_irls(X_dev, y_b, family)
        except NeffkitError:
            failed += 1
            continue
        eta_b = float(x @ refit.beta)
        yhats[kept] = float(family.inverse_link(np.float64(eta_b)))
        kept += 1
    if failed > 0.05 * B:
        raise ResimulationError(failed, B)

    emp_var = float(np.var(yhats[:kept], ddof=1))
    pred = predict(model, x)
    if emp_var == 0.0:
        return math.inf
    return pred.cond_var / emp_var
