"""Dense linear-algebra kernels shared by all numeric modules.

Small symmetric positive-definite (SPD) systems dominate this package:
normal equations X'X and X'VX, their Cholesky factors, explicit inverses
for coefficient covariances, and row-wise quadratic forms for leverages.
Everything is dense float64; designs are small-p, so no sparse or blocked
paths exist.

Two interchangeable backends implement the hot loops:

* ``numba`` (default when importable) — ``_jit``, compiled loops;
* ``numpy`` — ``_reference``, vectorized fallback.

Selection: the ``NEFFKIT_BACKEND`` environment variable (``numba`` or
``numpy``) wins; otherwise numba is used when available. Tests and the
benchmark switch at runtime via :func:`use_backend`.

``quadratic_form`` deliberately stays on a single NumPy code path in
both backends: it sits on the per-prediction (cold) path, and keeping it
backend-independent means a stored model yields bit-identical predictions
no matter which backend is active.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import AsymmetricMatrix, DimensionMismatch, NonFiniteInput, NotPositiveDefinite
from . import _reference

SYMMETRY_RTOL = 1e-10

_impl = None
_backend_name = ""


def _load_backend(name: str):
    if name == "numpy":
        return _reference
    if name == "numba":
        from . import _jit

        return _jit
    raise ValueError(f"unknown kernel backend {name!r} (expected 'numba' or 'numpy')")


def use_backend(name: str) -> str:
    """Switch the active kernel backend; returns the previous backend name.

    Intended for tests and benchmarks; not safe to call concurrently with
    running computations.
    """
    global _impl, _backend_name
    previous = _backend_name
    _impl = _load_backend(name)
    _backend_name = name
    return previous


def active_backend() -> str:
    return _backend_name


def _init_default_backend() -> None:
    requested = os.environ.get("NEFFKIT_BACKEND", "").strip().lower()
    if requested:
        use_backend(requested)
        return
    try:
        use_backend("numba")
    except ImportError:
        use_backend("numpy")


_init_default_backend()


# ---------------------------------------------------------------------------
# input validation
# ---------------------------------------------------------------------------

def _as_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return a


def _as_vector(v, name: str = "vector") -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput(f"{name} contains NaN or Inf")
    return v


def _require_spd_input(a, name: str) -> np.ndarray:
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {a.shape}")
    if a.shape[0] == 0:
        raise DimensionMismatch(f"{name} must have at least one row")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * max(scale, 1.0):
        raise AsymmetricMatrix(f"{name} is not symmetric within tolerance")
    return a


# ---------------------------------------------------------------------------
# public kernels
# ---------------------------------------------------------------------------

def cholesky(a, check: bool = True) -> np.ndarray:
    """Lower-triangular L with L L' = A for symmetric positive-definite A.

    Raises NotPositiveDefinite when a pivot falls at or below
    p * eps * max(diag A); that signals rank deficiency (or weights
    collapsed by separation) rather than a numerical quirk.
    """
    if check:
        a = _require_spd_input(a, "A")
    lower, info = _impl.cholesky_lower(a)
    if info >= 0:
        raise NotPositiveDefinite(info)
    return lower


def solve_spd(a, b, check: bool = True) -> np.ndarray:
    """Solve A x = b for symmetric positive-definite A."""
    if check:
        a = _require_spd_input(a, "A")
        b = _as_vector(b, "b")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"A is {a.shape} but b has length {b.shape[0]}")
    lower = cholesky(a, check=False)
    return _impl.solve_lower_transpose(lower, _impl.solve_lower(lower, b))


def spd_inverse(a, check: bool = True) -> np.ndarray:
    """Explicit inverse of a symmetric positive-definite matrix.

    The result is symmetrized, so it can be stored as a covariance matrix
    without round-off asymmetry.
    """
    if check:
        a = _require_spd_input(a, "A")
    lower = cholesky(a, check=False)
    inv = _impl.inverse_from_cholesky(lower)
    return (inv + inv.T) / 2.0


def quadratic_form(a, x) -> float:
    """x' A x. Only the symmetric part of A contributes.

    Single NumPy code path in every backend (see module docstring).
    """
    a = _as_matrix(a, "A")
    x = _as_vector(x, "x")
    if a.shape[0] != a.shape[1] or a.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"A is {a.shape} but x has length {x.shape[0]}")
    return float(x @ a @ x)


def xtwx(x, w=None, check: bool = True) -> np.ndarray:
    """X' diag(w) X accumulated row-wise (w omitted means unweighted X'X)."""
    if check:
        x = _as_matrix(x, "X")
    if w is None:
        w = np.ones(x.shape[0], dtype=np.float64)
    elif check:
        w = _as_vector(w, "w")
    if w.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"X has {x.shape[0]} rows but w has length {w.shape[0]}")
    return _impl.xtwx(x, w)


def xtwz(x, w, z, check: bool = True) -> np.ndarray:
    """X' diag(w) z."""
    if check:
        x = _as_matrix(x, "X")
        w = _as_vector(w, "w")
        z = _as_vector(z, "z")
    if w.shape[0] != x.shape[0] or z.shape[0] != x.shape[0]:
        raise DimensionMismatch("row count of X, w and z must agree")
    return _impl.xtwz(x, w, z)


def row_quad_forms(x, a, w=None, check: bool = True) -> np.ndarray:
    """Per-row h_i = w_i * x_i' A x_i without materializing X A X'."""
    if check:
        x = _as_matrix(x, "X")
        a = _as_matrix(a, "A")
    if a.shape[0] != a.shape[1] or a.shape[0] != x.shape[1]:
        raise DimensionMismatch(f"X is {x.shape} but A is {a.shape}")
    if w is None:
        w = np.ones(x.shape[0], dtype=np.float64)
    elif check:
        w = _as_vector(w, "w")
    if w.shape[0] != x.shape[0]:
        raise DimensionMismatch(f"X has {x.shape[0]} rows but w has length {w.shape[0]}")
    return _impl.row_quad_forms(x, a, w)
