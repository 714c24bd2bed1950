"""Timing comparison of the numba and numpy kernel backends.

Usage (from the repository root, after `pip install -e .`):

    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --n 100000 --p 12 --repeats 9

Each kernel is warmed once per backend before timing (so numba's JIT
compilation never lands in a measurement) and the median of the repeats
is reported. The end-to-end row is a full logistic IRLS fit.
"""

import argparse
import time

import numpy as np

from neffkit import kernels
from neffkit.families import BINOMIAL
from neffkit.fit import fit_irls

BACKENDS = ("numpy", "numba")


def median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def make_problem(n: int, p: int, seed: int):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.standard_normal((n, p - 1))])
    w = rng.uniform(0.05, 0.25, size=n)
    z = rng.standard_normal(n)
    beta_true = rng.normal(0.0, 0.4, size=p)
    prob = 1.0 / (1.0 + np.exp(-(X @ beta_true)))
    y = (rng.random(n) < prob).astype(np.float64)
    A = kernels.xtwx(X, w)
    return X, w, z, y, A


def bench_backend(name: str, n: int, p: int, repeats: int, seed: int) -> dict[str, float]:
    previous = kernels.use_backend(name)
    try:
        X, w, z, y, A = make_problem(n, p, seed)
        A_inv = kernels.spd_inverse(A)
        cases = {
            "xtwx": lambda: kernels.xtwx(X, w),
            "xtwz": lambda: kernels.xtwz(X, w, z),
            "row_quad_forms": lambda: kernels.row_quad_forms(X, A_inv, w),
            "cholesky": lambda: kernels.cholesky(A),
            "solve_spd": lambda: kernels.solve_spd(A, A[0]),
            "spd_inverse": lambda: kernels.spd_inverse(A),
            "irls_fit": lambda: fit_irls(X, y, BINOMIAL),
        }
        results = {}
        for label, fn in cases.items():
            fn()  # warm-up: triggers JIT compilation on the numba backend
            results[label] = median_time(fn, repeats)
        return results
    finally:
        kernels.use_backend(previous)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=50000, help="rows (default 50000)")
    parser.add_argument("--p", type=int, default=8, help="columns (default 8)")
    parser.add_argument("--repeats", type=int, default=7, help="timed repeats (default 7)")
    parser.add_argument("--seed", type=int, default=20240101)
    args = parser.parse_args()

    available = []
    for name in BACKENDS:
        try:
            kernels.use_backend(name)
            available.append(name)
        except ImportError:
            print(f"backend {name!r} unavailable; skipping")

    print(f"n={args.n} p={args.p} repeats={args.repeats} (median reported)\n")
    results = {
        name: bench_backend(name, args.n, args.p, args.repeats, args.seed)
        for name in available
    }

    labels = list(next(iter(results.values())))
    header = f"{'kernel':<16}" + "".join(f"{name:>12}" for name in available)
    if len(available) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label in labels:
        row = f"{label:<16}"
        for name in available:
            row += f"{results[name][label] * 1e3:>10.3f}ms"
        if len(available) == 2:
            a, b = (results[name][label] for name in available)
            row += f"{a / b:>9.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
