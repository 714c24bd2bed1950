"""Numba-compiled kernel implementations.

Same contracts as ``_reference``; explicit loops compile to tight
machine code, which pays off in the IRLS inner loop, the resimulation
oracle (thousands of refits) and leverage sweeps over large designs.

Kept free of fastmath so results stay reproducible run to run.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EPS = float(np.finfo(np.float64).eps)


@njit(cache=True)
def cholesky_lower(a):
    p = a.shape[0]
    lower = np.zeros_like(a)
    max_diag = a[0, 0]
    for j in range(1, p):
        if a[j, j] > max_diag:
            max_diag = a[j, j]
    threshold = p * EPS * max_diag
    for j in range(p):
        d = a[j, j]
        for k in range(j):
            d -= lower[j, k] * lower[j, k]
        if d <= threshold:
            return lower, j
        root = np.sqrt(d)
        lower[j, j] = root
        for i in range(j + 1, p):
            t = a[i, j]
            for k in range(j):
                t -= lower[i, k] * lower[j, k]
            lower[i, j] = t / root
    return lower, -1


@njit(cache=True)
def solve_lower(lower, b):
    p = lower.shape[0]
    y = np.zeros_like(b)
    for i in range(p):
        t = b[i]
        for k in range(i):
            t -= lower[i, k] * y[k]
        y[i] = t / lower[i, i]
    return y


@njit(cache=True)
def solve_lower_transpose(lower, y):
    p = lower.shape[0]
    x = np.zeros_like(y)
    for i in range(p - 1, -1, -1):
        t = y[i]
        for k in range(i + 1, p):
            t -= lower[k, i] * x[k]
        x[i] = t / lower[i, i]
    return x


@njit(cache=True)
def inverse_from_cholesky(lower):
    p = lower.shape[0]
    inv = np.zeros((p, p), dtype=lower.dtype)
    rhs = np.zeros(p, dtype=lower.dtype)
    for i in range(p):
        rhs[:] = 0.0
        rhs[i] = 1.0
        y = solve_lower(lower, rhs)
        inv[:, i] = solve_lower_transpose(lower, y)
    return inv


@njit(cache=True)
def xtwx(x, w):
    n, p = x.shape
    out = np.zeros((p, p), dtype=x.dtype)
    for i in range(n):
        wi = w[i]
        for j in range(p):
            xij = wi * x[i, j]
            for k in range(j, p):
                out[j, k] += xij * x[i, k]
    for j in range(p):
        for k in range(j + 1, p):
            out[k, j] = out[j, k]
    return out


@njit(cache=True)
def xtwz(x, w, z):
    n, p = x.shape
    out = np.zeros(p, dtype=x.dtype)
    for i in range(n):
        wz = w[i] * z[i]
        for j in range(p):
            out[j] += x[i, j] * wz
    return out


@njit(cache=True)
def row_quad_forms(x, a, w):
    n, p = x.shape
    h = np.zeros(n, dtype=x.dtype)
    for i in range(n):
        acc = 0.0
        for j in range(p):
            t = 0.0
            for k in range(p):
                t += a[j, k] * x[i, k]
            acc += x[i, j] * t
        h[i] = w[i] * acc
    return h
