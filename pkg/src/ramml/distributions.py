"""Error laws, the long-tailed symmetric density and predictor samplers.

Samplers accept anything :func:`numpy.random.default_rng` accepts as a
seed (an int, a ``SeedSequence`` or a ``Generator``); the same int seed
always reproduces the same draws.
"""
import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import InvalidCorrelation, InvalidParams


@dataclass(frozen=True)
class LtsParams:
    """Shape ``p`` and scale ``sigma`` of the long-tailed symmetric law."""

    p: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p >= 2):
            raise InvalidParams(f"shape p must be >= 2, got {self.p}")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParams(f"sigma must be positive, got {self.sigma}")

    @property
    def q(self):
        return 2.0 * self.p - 3.0


def lts_pdf(e, params):
    """Density of the long-tailed symmetric law, vectorised over `e`.

    ``f(e) = (1 + e**2 / (q sigma**2))**(-p) / (sqrt(q) B(1/2, p - 1/2) sigma)``
    """
    if not isinstance(params, LtsParams):
        params = LtsParams(*params)
    p, sigma, q = params.p, params.sigma, params.q
    e = np.asarray(e, dtype=float)
    log_norm = 0.5 * np.log(q) + special.betaln(0.5, p - 0.5) + np.log(sigma)
    return np.exp(-p * np.log1p(e * e / (q * sigma * sigma)) - log_norm)


class ErrorLaw(str, enum.Enum):
    NORMAL = "normal"
    LAPLACE = "laplace"
    T5 = "t5"
    CAUCHY = "cauchy"
    SLASH = "slash"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"normal01": "normal", "n01": "normal", "t1": "cauchy", "studentt5": "t5"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(law.value for law in cls)
            raise InvalidParams(f"unknown error law {value!r} (expected one of {choices})") from None


def sample_error(law, n, seed=None):
    """Draw `n` i.i.d. errors from `law`.

    Laplace has unit scale (density ``exp(-|e|) / 2``); slash is a standard
    normal divided by an independent Uniform(0, 1).  No law is rescaled to
    unit variance.
    """
    law = ErrorLaw.parse(law)
    if int(n) != n or n < 1:
        raise InvalidParams(f"n must be a positive integer, got {n}")
    n = int(n)
    rng = np.random.default_rng(seed)
    if law is ErrorLaw.NORMAL:
        return rng.standard_normal(n)
    if law is ErrorLaw.LAPLACE:
        return rng.laplace(0.0, 1.0, n)
    if law is ErrorLaw.T5:
        return rng.standard_t(5, n)
    if law is ErrorLaw.CAUCHY:
        return rng.standard_t(1, n)
    z = rng.standard_normal(n)
    # 1 - U lies in (0, 1], so the ratio stays finite.
    u = 1.0 - rng.random(n)
    return z / u


def equicorrelation(m, rho):
    """The ``m x m`` matrix with unit diagonal and constant off-diagonal `rho`."""
    if m > 1 and not (-1.0 / (m - 1) < rho < 1.0):
        raise InvalidCorrelation(
            f"rho={rho} does not give a positive definite {m}x{m} equicorrelation matrix")
    V = np.full((m, m), float(rho))
    np.fill_diagonal(V, 1.0)
    return V


def sample_predictors(n, m, rho=0.0, seed=None):
    """Rows i.i.d. ``N_m(0, V)`` with ``V`` the equicorrelation matrix."""
    if m < 1:
        raise InvalidParams("m must be >= 1")
    V = equicorrelation(m, rho)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, m))
    if m == 1 or rho == 0:
        return Z
    return Z @ np.linalg.cholesky(V).T
