"""Model families: link functions, variance functions, deviances, simulators.

Three families are supported, each with its canonical link:

============== ============ =============== ====================
name           inverse link d(inv link)/dated  Var(Y | eta)
============== ============ =============== ====================
gaussian-identity  eta          1               dispersion (sigma^2)
binomial-logit     expit(eta)   mu (1 - mu)     mu (1 - mu)
poisson-log        exp(eta)     mu              mu
============== ============ =============== ====================

Because all links are canonical, the score contribution of a row is
simply y - mu, which the fitting loop exploits.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidOutcome

# Start-value clamp keeping g(mean(y)) finite for degenerate outcomes.
START_CLAMP = 1e-3


class Family:
    """One exponential-family/link pair. Stateless; use the singletons below."""

    name: str = ""
    has_dispersion: bool = False

    def inverse_link(self, eta: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def link(self, mu: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean_derivative(self, eta: np.ndarray, mu: np.ndarray) -> np.ndarray:
        """d g^{-1}(eta) / d eta, evaluated with mu = g^{-1}(eta) supplied."""
        raise NotImplementedError

    def conditional_variance(self, mu: np.ndarray, dispersion: float) -> np.ndarray:
        """Var(Y | eta) as a function of the predicted mean."""
        raise NotImplementedError

    def deviance(self, y: np.ndarray, mu: np.ndarray) -> float:
        raise NotImplementedError

    def simulate(self, rng: np.random.Generator, mu: np.ndarray, dispersion: float) -> np.ndarray:
        """Draw one outcome vector from the fitted conditional distribution."""
        raise NotImplementedError

    def initial_intercept(self, y: np.ndarray) -> float:
        """Deterministic start value: link of the (clamped) outcome mean."""
        raise NotImplementedError

    def validate_outcome(self, y: np.ndarray) -> None:
        """Raise InvalidOutcome when y is outside the family's domain."""

    def __repr__(self) -> str:  # pragma: no cover
        return f"<Family {self.name}>"


class Gaussian(Family):
    name = "gaussian-identity"
    has_dispersion = True

    def inverse_link(self, eta):
        return np.asarray(eta, dtype=np.float64)

    def link(self, mu):
        return np.asarray(mu, dtype=np.float64)

    def mean_derivative(self, eta, mu):
        return np.ones_like(np.asarray(eta, dtype=np.float64))

    def conditional_variance(self, mu, dispersion):
        return np.full_like(np.asarray(mu, dtype=np.float64), dispersion)

    def deviance(self, y, mu):
        r = y - mu
        return float(r @ r)

    def simulate(self, rng, mu, dispersion):
        return rng.normal(mu, np.sqrt(dispersion))

    def initial_intercept(self, y):
        return float(np.mean(y))


class Binomial(Family):
    name = "binomial-logit"

    def inverse_link(self, eta):
        eta = np.asarray(eta, dtype=np.float64)
        # expit, computed stably on both tails
        out = np.empty_like(eta)
        pos = eta >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
        e = np.exp(eta[~pos])
        out[~pos] = e / (1.0 + e)
        return out

    def link(self, mu):
        mu = np.asarray(mu, dtype=np.float64)
        return np.log(mu) - np.log1p(-mu)

    def mean_derivative(self, eta, mu):
        return mu * (1.0 - mu)

    def conditional_variance(self, mu, dispersion):
        return mu * (1.0 - mu)

    def deviance(self, y, mu):
        # Bernoulli rows: saturated log-likelihood is zero, so the deviance is
        # -2 log L. mu is clamped away from exact 0/1 reached by underflow.
        mu = np.clip(mu, 1e-300, 1.0 - 1e-16)
        return float(-2.0 * (y @ np.log(mu) + (1.0 - y) @ np.log1p(-mu)))

    def simulate(self, rng, mu, dispersion):
        return rng.binomial(1, mu).astype(np.float64)

    def initial_intercept(self, y):
        m = min(max(float(np.mean(y)), START_CLAMP), 1.0 - START_CLAMP)
        return float(np.log(m) - np.log1p(-m))

    def validate_outcome(self, y):
        if not np.all((y == 0.0) | (y == 1.0)):
            raise InvalidOutcome("binomial-logit outcome must contain only 0 and 1")


class Poisson(Family):
    name = "poisson-log"

    # exp overflow guard; linear predictors this large are already degenerate
    ETA_CAP = 700.0

    def inverse_link(self, eta):
        return np.exp(np.minimum(np.asarray(eta, dtype=np.float64), self.ETA_CAP))

    def link(self, mu):
        return np.log(np.asarray(mu, dtype=np.float64))

    def mean_derivative(self, eta, mu):
        return np.asarray(mu, dtype=np.float64)

    def conditional_variance(self, mu, dispersion):
        return np.asarray(mu, dtype=np.float64)

    def deviance(self, y, mu):
        mu = np.maximum(mu, 1e-300)
        with np.errstate(divide="ignore", invalid="ignore"):
            ylogy = np.where(y > 0, y * np.log(y / mu), 0.0)
        return float(2.0 * np.sum(ylogy - (y - mu)))

    def simulate(self, rng, mu, dispersion):
        return rng.poisson(mu).astype(np.float64)

    def initial_intercept(self, y):
        return float(np.log(max(float(np.mean(y)), START_CLAMP)))

    def validate_outcome(self, y):
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise InvalidOutcome("poisson-log outcome must contain nonnegative integers")


GAUSSIAN = Gaussian()
BINOMIAL = Binomial()
POISSON = Poisson()

FAMILIES: dict[str, Family] = {f.name: f for f in (GAUSSIAN, BINOMIAL, POISSON)}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(
            f"unknown family {name!r}; expected one of {sorted(FAMILIES)}"
        ) from None
