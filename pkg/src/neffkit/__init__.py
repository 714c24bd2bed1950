"""neffkit: per-patient effective sample size for clinical prediction models.

Fit a linear or generalized linear model, then ask, for any new covariate
profile: how many identical patients would an outcome average need to be
as certain as this model's prediction? That count -- the effective sample
size -- plus its relatives (relative variance, leverages, distribution
reports) is what this package computes, serves, and displays.
"""

from . import kernels
from .design import CovariateSpec, Dataset, DesignSpec, build_design, encode, marginal_means, read_csv
from .errors import NeffkitError
from .families import BINOMIAL, GAUSSIAN, POISSON, Family, get_family
from .fit import FittedModel, fit_irls, fit_ols, linear_predictor, weight_matrix
from .neff import (
    LeverageSet,
    PredictionWithUncertainty,
    dev_percentile,
    leverages,
    neff_glm,
    neff_linear,
    neff_simulated,
    predict,
    relvar,
)
from .report import NeffDistribution, ReportBundle, compare, emit_plot_data, summarize
from .store import load, save
from .workflow import fit_model, predict_record, validation_report

__version__ = "0.1.0"

__all__ = [
    "BINOMIAL",
    "CovariateSpec",
    "Dataset",
    "DesignSpec",
    "Family",
    "FittedModel",
    "GAUSSIAN",
    "LeverageSet",
    "NeffDistribution",
    "NeffkitError",
    "POISSON",
    "PredictionWithUncertainty",
    "ReportBundle",
    "build_design",
    "compare",
    "dev_percentile",
    "emit_plot_data",
    "encode",
    "fit_irls",
    "fit_model",
    "fit_ols",
    "get_family",
    "kernels",
    "leverages",
    "linear_predictor",
    "load",
    "marginal_means",
    "neff_glm",
    "neff_linear",
    "neff_simulated",
    "predict",
    "predict_record",
    "read_csv",
    "relvar",
    "save",
    "summarize",
    "validation_report",
    "weight_matrix",
    "__version__",
]
