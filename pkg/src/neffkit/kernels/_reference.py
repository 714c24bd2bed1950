"""Pure-NumPy kernel implementations.

This is the fallback backend: every function here has a twin in
``_jit`` with identical semantics. The Cholesky loop runs column by
column in Python with vectorized tails, which is plenty for the small
p (<= ~100) these models use; the row-sweep kernels are vectorized.

Functions return status codes instead of raising so both backends stay
interchangeable (numba cannot raise rich exceptions); the public
wrappers in ``neffkit.kernels`` translate statuses into errors.
"""

from __future__ import annotations

import numpy as np

EPS = float(np.finfo(np.float64).eps)


def cholesky_lower(a: np.ndarray) -> tuple[np.ndarray, int]:
    """Lower Cholesky factor of a symmetric matrix.

    Returns ``(L, info)`` where ``info`` is -1 on success, or the index
    of the first pivot at or below ``p * eps * max(diag(a))``.
    """
    p = a.shape[0]
    lower = np.zeros_like(a)
    threshold = p * EPS * np.max(np.diag(a))
    for j in range(p):
        d = a[j, j] - lower[j, :j] @ lower[j, :j]
        if d <= threshold:
            return lower, j
        root = np.sqrt(d)
        lower[j, j] = root
        if j + 1 < p:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / root
    return lower, -1


def solve_lower(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward substitution: solve L y = b for lower-triangular L."""
    p = lower.shape[0]
    y = np.zeros_like(b)
    for i in range(p):
        y[i] = (b[i] - lower[i, :i] @ y[:i]) / lower[i, i]
    return y


def solve_lower_transpose(lower: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Back substitution: solve L' x = y for lower-triangular L."""
    p = lower.shape[0]
    x = np.zeros_like(y)
    for i in range(p - 1, -1, -1):
        x[i] = (y[i] - lower[i + 1 :, i] @ x[i + 1 :]) / lower[i, i]
    return x


def inverse_from_cholesky(lower: np.ndarray) -> np.ndarray:
    """Inverse of A = L L' from its Cholesky factor (solves against I)."""
    p = lower.shape[0]
    # Forward then back substitution with the identity as right-hand side,
    # vectorized across columns.
    y = np.zeros((p, p), dtype=lower.dtype)
    for i in range(p):
        rhs = np.zeros(p, dtype=lower.dtype)
        rhs[i] = 1.0
        y[:, i] = solve_lower(lower, rhs)
    inv = np.zeros((p, p), dtype=lower.dtype)
    for i in range(p):
        inv[:, i] = solve_lower_transpose(lower, y[:, i])
    return inv


def xtwx(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted cross product X' diag(w) X, accumulated in one pass over rows."""
    return (x * w[:, None]).T @ x


def xtwz(x: np.ndarray, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Weighted projection X' diag(w) z."""
    return x.T @ (w * z)


def row_quad_forms(x: np.ndarray, a: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Per-row quadratic forms h_i = w_i * x_i' A x_i, without any n-by-n matrix."""
    return w * np.einsum("ij,jk,ik->i", x, a, x)
