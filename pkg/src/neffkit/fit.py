"""Model fitting: closed-form least squares and IRLS for the GLM families.

Both fitters return a :class:`FittedModel` holding the coefficient vector,
its covariance, and enough development-sample context that every
per-patient uncertainty quantity can later be computed without the raw
data. The covariance convention is uniform across families:

    Cov(beta) = (X' V X)^{-1}

with V the diagonal weight matrix from :func:`weight_matrix`; for the
gaussian family this is the familiar sigma^2 (X'X)^{-1}. Gaussian fits
additionally keep the *unscaled* (X'X)^{-1} so that design-only
quantities survive a perfect fit (sigma^2 = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .design import DesignSpec
from .errors import (
    DimensionMismatch,
    NotConverged,
    NotPositiveDefinite,
    RankDeficient,
    TooFewRows,
)
from .families import Family, GAUSSIAN, get_family

if TYPE_CHECKING:  # pragma: no cover
    from .report import NeffDistribution

# IRLS controls: relative-deviance stopping rule, iteration cap, and the
# number of times a rejected step is halved before giving up.
IRLS_TOL = 1e-10
IRLS_MAX_ITER = 100
IRLS_MAX_HALVINGS = 10

# Working weights are floored here instead of erroring so quasi-separated
# fits survive long enough to be reported as such.
WEIGHT_FLOOR = 1e-12

# |linear predictor| beyond this at convergence is a separation red flag:
# the fitted risk is within ~1e-13 of 0 or 1.
SEPARATION_ETA = 30.0


@dataclass
class FittedModel:
    """A fitted linear or generalized linear model plus development context.

    The first block of fields is the estimation result proper; the rest are
    decorations attached by the higher-level workflow (development n_eff
    distribution, per-covariate raw-data ranges, bookkeeping for reports).
    """

    family: Family
    beta: np.ndarray
    cov_beta: np.ndarray
    dispersion: float
    n_dev: int
    deviance: float
    converged: bool
    design_spec: DesignSpec | None = None
    unscaled_xtx_inverse: np.ndarray | None = None
    warnings: tuple[str, ...] = ()
    dev_neff: "NeffDistribution | None" = None
    dev_neff_sorted: np.ndarray | None = field(default=None, repr=False)
    covariate_stats: dict[str, dict[str, float]] | None = None
    model_name: str = "model"
    thresholds: tuple[float, ...] = (30.0,)

    @property
    def p(self) -> int:
        return int(self.beta.shape[0])

    def validate(self) -> None:
        """Re-check construction invariants (used after deserialization)."""
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("beta contains non-finite entries")
        if self.cov_beta.shape != (self.p, self.p):
            raise DimensionMismatch(
                f"cov_beta is {self.cov_beta.shape}, expected {(self.p, self.p)}"
            )
        if self.dispersion < 0:
            raise ValueError("dispersion must be nonnegative")
        if self.family.name != GAUSSIAN.name and self.dispersion != 1.0:
            raise ValueError(f"{self.family.name} requires dispersion 1.0")


def linear_predictor(model: FittedModel, x: np.ndarray) -> float:
    """eta = x' beta for one encoded design row."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.beta.shape:
        raise DimensionMismatch(f"x has shape {x.shape}, beta has {model.beta.shape}")
    return float(x @ model.beta)


def weight_matrix(
    X: np.ndarray, beta: np.ndarray, family: Family, dispersion: float = 1.0
) -> np.ndarray:
    """Diagonal of V: per-row (d mu/d eta)^2 / Var(Y|eta).

    gaussian 1/sigma^2, binomial p(1-p), poisson mu. Weights are floored
    at WEIGHT_FLOOR rather than allowed to collapse to zero.
    """
    X = np.asarray(X, dtype=np.float64)
    eta = X @ np.asarray(beta, dtype=np.float64)
    mu = family.inverse_link(eta)
    d = family.mean_derivative(eta, mu)
    var = family.conditional_variance(mu, dispersion)
    # Where the conditional variance degenerates to zero (risk pinned at 0
    # or 1, zero poisson mean) the canonical-link weight d^2/var goes to
    # zero as well; write that limit and let the floor lift it.
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(var > 0, d * d / var, 0.0)
    return np.maximum(w, WEIGHT_FLOOR)


def _prepare(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"design must be 2-d, got {X.ndim}-d")
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DimensionMismatch(f"outcome length {y.shape} does not match {X.shape[0]} rows")
    n, p = X.shape
    if n <= p:
        raise TooFewRows(n, p)
    return X, y, n, p


def fit_ols(X: np.ndarray, y: np.ndarray, design_spec: DesignSpec | None = None) -> FittedModel:
    """Ordinary least squares: beta = (X'X)^{-1} X'y, sigma^2 = RSS/(n-p)."""
    X, y, n, p = _prepare(X, y)
    xtx = kernels.xtwx(X)
    try:
        beta = kernels.solve_spd(xtx, X.T @ y, check=False)
        unscaled_inv = kernels.spd_inverse(xtx, check=False)
    except NotPositiveDefinite as err:
        raise RankDeficient(err.pivot) from None
    resid = y - X @ beta
    rss = float(resid @ resid)
    sigma2 = rss / (n - p)
    return FittedModel(
        family=GAUSSIAN,
        beta=beta,
        cov_beta=sigma2 * unscaled_inv,
        dispersion=sigma2,
        n_dev=n,
        deviance=rss,
        converged=True,
        design_spec=design_spec,
        unscaled_xtx_inverse=unscaled_inv,
    )


def fit_irls(
    X: np.ndarray,
    y: np.ndarray,
    family: Family | str,
    design_spec: DesignSpec | None = None,
) -> FittedModel:
    """Maximum likelihood by iteratively reweighted least squares.

    Canonical links only, so each update is the Newton step
    beta += (X'WX)^{-1} X'(y - mu) with W the working weights. A step that
    increases the deviance is halved up to IRLS_MAX_HALVINGS times;
    convergence is declared on a relative deviance change below IRLS_TOL.

    Raises NotConverged with the partial fit attached as ``.model`` so
    callers holding an explicit override can keep it.
    """
    if isinstance(family, str):
        family = get_family(family)
    X, y, n, p = _prepare(X, y)
    family.validate_outcome(y)

    if family.name == GAUSSIAN.name:
        # One exact Newton step from any start; reuse the closed form.
        model = fit_ols(X, y, design_spec=design_spec)
        return model

    beta = np.zeros(p, dtype=np.float64)
    beta[0] = family.initial_intercept(y)
    eta = X @ beta
    mu = family.inverse_link(eta)
    dev = family.deviance(y, mu)

    weight_floored = False
    converged = False
    for _ in range(IRLS_MAX_ITER):
        # canonical link: (dmu/deta)^2 / Var(Y) collapses to dmu/deta
        w = family.mean_derivative(eta, mu)
        if np.any(w < WEIGHT_FLOOR):
            weight_floored = True
            w = np.maximum(w, WEIGHT_FLOOR)
        try:
            step = kernels.solve_spd(kernels.xtwx(X, w, check=False), X.T @ (y - mu), check=False)
        except NotPositiveDefinite as err:
            raise RankDeficient(err.pivot) from None

        scale = 1.0
        for _halving in range(IRLS_MAX_HALVINGS + 1):
            beta_new = beta + scale * step
            eta_new = X @ beta_new
            mu_new = family.inverse_link(eta_new)
            dev_new = family.deviance(y, mu_new)
            if dev_new <= dev or not np.isfinite(dev):
                break
            scale *= 0.5
        else:
            partial = _finalize_irls(X, y, beta, family, n, dev, False, weight_floored, design_spec)
            raise NotConverged(
                f"deviance would not decrease after {IRLS_MAX_HALVINGS} step halvings",
                model=partial,
            )

        delta = abs(dev - dev_new)
        beta, eta, mu, dev = beta_new, eta_new, mu_new, dev_new
        if delta / (abs(dev_new) + 0.1) < IRLS_TOL:
            converged = True
            break

    model = _finalize_irls(X, y, beta, family, n, dev, converged, weight_floored, design_spec)
    if not converged:
        raise NotConverged(f"no convergence within {IRLS_MAX_ITER} iterations", model=model)
    return model


def _finalize_irls(X, y, beta, family, n, dev, converged, weight_floored, design_spec):
    """Evaluate Cov(beta) = (X'VX)^{-1} at the final coefficients."""
    w = weight_matrix(X, beta, family, 1.0)
    try:
        cov = kernels.spd_inverse(kernels.xtwx(X, w, check=False), check=False)
    except NotPositiveDefinite as err:
        raise RankDeficient(err.pivot) from None

    warnings = []
    eta = X @ beta
    max_eta = float(np.max(np.abs(eta)))
    if weight_floored or max_eta > SEPARATION_ETA:
        warnings.append(
            "SeparationSuspected: fitted risks effectively reach the outcome "
            f"boundary (max |linear predictor| = {max_eta:.1f})"
        )
    return FittedModel(
        family=family,
        beta=beta,
        cov_beta=cov,
        dispersion=1.0,
        n_dev=n,
        deviance=float(dev),
        converged=converged,
        design_spec=design_spec,
        warnings=tuple(warnings),
    )


def with_decorations(model: FittedModel, **fields) -> FittedModel:
    """Copy a model with report-facing fields attached."""
    return replace(model, **fields)
