"""Shared fixtures: reference datasets, fitted models, backend switching."""

from __future__ import annotations

import numpy as np
import pytest

from neffkit import kernels
from neffkit.design import Dataset
from neffkit.workflow import fit_model


def _available_backends() -> list[str]:
    names = ["numpy"]
    try:
        import numba  # noqa: F401

        names.append("numba")
    except ImportError:
        pass
    return names


BACKENDS = _available_backends()


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Pay each backend's one-off compile cost up front.

    Timed tests (the acceptance runtime budgets) must measure steady-state
    arithmetic, not the first-call JIT compilation.
    """
    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(8), rng.standard_normal(8)])
    a = X.T @ X + np.eye(2)
    for name in BACKENDS:
        prev = kernels.use_backend(name)
        kernels.cholesky(a)
        kernels.solve_spd(a, np.ones(2))
        kernels.spd_inverse(a)
        kernels.xtwx(X, np.ones(8))
        kernels.xtwz(X, np.ones(8), np.ones(8))
        kernels.row_quad_forms(X, np.eye(2), np.ones(8))
        kernels.use_backend(prev)


@pytest.fixture(params=BACKENDS)
def backend(request):
    """Run the test once per available kernel backend."""
    prev = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(prev)


def make_dataset(**columns) -> Dataset:
    arrays = {name: np.asarray(vals, dtype=np.float64) for name, vals in columns.items()}
    n = len(next(iter(arrays.values())))
    return Dataset(columns=tuple(arrays), data=arrays, n=n)


# ---------------------------------------------------------------------------
# reference datasets
#
# d1: three x points 0,1,2; with y = (0,0,3) the OLS fit is beta = (-0.5, 1.5).
# g:  two arms of 10; 3 events at x=0, 5 at x=1 -> saturated logistic fit.
# d2: eight-point logistic problem checked against the Newton oracle.
# ---------------------------------------------------------------------------

D2_X_RAW = np.array([-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
D2_Y = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0])


@pytest.fixture(scope="session")
def d1_data() -> Dataset:
    return make_dataset(x=[0.0, 1.0, 2.0], y=[0.0, 0.0, 3.0])


@pytest.fixture(scope="session")
def d1_model(d1_data):
    return fit_model(d1_data, outcome="y", predictors=["x"], family="gaussian", model_name="d1")


@pytest.fixture(scope="session")
def g_data() -> Dataset:
    x = [0.0] * 10 + [1.0] * 10
    y = [1.0] * 3 + [0.0] * 7 + [1.0] * 5 + [0.0] * 5
    return make_dataset(x=x, y=y)


@pytest.fixture(scope="session")
def g_model(g_data):
    return fit_model(g_data, outcome="y", predictors=["x"], family="binomial", model_name="g")


@pytest.fixture(scope="session")
def d2_data() -> Dataset:
    return make_dataset(x=D2_X_RAW, y=D2_Y)


@pytest.fixture(scope="session")
def d2_model(d2_data):
    return fit_model(d2_data, outcome="y", predictors=["x"], family="binomial", model_name="d2")


def write_csv(path, columns: dict) -> None:
    """Tiny CSV writer for test inputs (header + float rows)."""
    names = list(columns)
    rows = zip(*(columns[n] for n in names))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
