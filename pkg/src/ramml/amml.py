"""Adaptive modified maximum likelihood (AMML) and its leverage-robust form RAMML.

Errors are modelled by the long-tailed symmetric law with shape ``p``.
The score ``g(z) = z / (1 + z**2 / q)`` is linearised around standardised
residuals ``t`` from a robust starting fit, which turns the likelihood
equations into a weighted least-squares problem with a closed-form
solution.  RAMML additionally down-weights observations that are far from
the L1-median of the predictors.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .datasets import RegressionData
from .exceptions import DegenerateScale, DimensionMismatch, InvalidParams, ZeroTotalWeight
from .initial import InitialFit, fit_lts, fit_median_slope, fit_s
from .location import scaled_leverage_distance
from .numerics import solve_spd

DEFAULT_SHAPE = 16.5
#: Scale estimates below this (relative to the spread of y) count as zero.
SCALE_TOLERANCE = 1e-12


class Variant(str, enum.Enum):
    AMML = "AMML"
    RAMML = "RAMML"


class Initializer(str, enum.Enum):
    LTS = "LTS"
    S = "S"
    MEDIAN_SLOPE = "MedianSlope"


# Method tags carry the initializer as a suffix: 1 for LTS, 2 for S.
_SUFFIX = {Initializer.LTS: "1", Initializer.S: "2", Initializer.MEDIAN_SLOPE: "0"}
_STARTERS = {
    Initializer.LTS: lambda data, seed: fit_lts(data, seed=seed),
    Initializer.S: lambda data, seed: fit_s(data, seed=seed),
    Initializer.MEDIAN_SLOPE: lambda data, seed: fit_median_slope(data),
}


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings for :func:`fit`.

    ``seed`` is passed to the randomised starting estimator.
    """

    p: float = DEFAULT_SHAPE
    variant: Variant = Variant.RAMML
    initializer: Initializer = Initializer.LTS
    iterations: int = 2
    seed: int = None

    def __post_init__(self):
        if not (np.isfinite(self.p) and self.p >= 2):
            raise InvalidParams(f"shape p must be >= 2, got {self.p}")
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise InvalidParams(f"iterations must be a positive integer, got {self.iterations}")
        try:
            object.__setattr__(self, "variant", Variant(self.variant))
            object.__setattr__(self, "initializer", Initializer(self.initializer))
        except ValueError as exc:
            raise InvalidParams(str(exc)) from None
        object.__setattr__(self, "iterations", int(self.iterations))

    @property
    def method(self):
        return self.variant.value + _SUFFIX[self.initializer]

    @classmethod
    def from_method(cls, tag, **kw):
        """Config for a tag such as ``"RAMML2"`` (S start) or ``"AMML1"`` (LTS start)."""
        for init, suffix in _SUFFIX.items():
            for variant in Variant:
                if str(tag).upper() == (variant.value + suffix).upper():
                    return cls(variant=variant, initializer=init, **kw)
        raise InvalidParams(f"unknown method tag {tag!r}")


METHODS = ("AMML1", "AMML2", "RAMML1", "RAMML2")


@dataclass(frozen=True)
class WeightSet:
    """Linearisation coefficients and leverage weights for one iteration."""

    alpha: np.ndarray
    delta: np.ndarray
    delta_x: np.ndarray
    t: np.ndarray
    p: float

    @property
    def q(self):
        return 2.0 * self.p - 3.0

    @property
    def combined(self):
        """``delta * delta_x``, the weight each observation gets in the solve."""
        return self.delta * self.delta_x


@dataclass(frozen=True)
class IterationRecord:
    intercept: float
    coefficients: np.ndarray
    scale: float


@dataclass(frozen=True)
class ModifiedLikelihoodSolution:
    """Closed-form solution together with its building blocks.

    ``coefficients = K + L * scale``; ``B`` and ``C`` are the coefficients of
    the quadratic the scale solves.
    """

    intercept: float
    coefficients: np.ndarray
    scale: float
    K: np.ndarray
    L: np.ndarray
    B: float
    C: float


@dataclass(frozen=True)
class FitResult:
    """Final AMML/RAMML estimates with weights and per-iteration trace.

    ``scale`` is positive except for data that the weighted fit reproduces
    exactly, where it is 0.
    """

    intercept: float
    coefficients: np.ndarray
    scale: float
    weights: WeightSet
    residuals: np.ndarray
    standardized_residuals: np.ndarray
    method: str
    iterations: tuple = ()
    initial: InitialFit = field(default=None, repr=False, compare=False)

    @property
    def params(self):
        return np.concatenate([[self.intercept], self.coefficients])

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return self.intercept + X @ self.coefficients

    def to_dict(self):
        """Plain-Python representation (floats and lists), suitable for JSON."""
        w = self.weights
        return {
            "method": self.method,
            "intercept": self.intercept,
            "coefficients": self.coefficients.tolist(),
            "scale": self.scale,
            "residuals": self.residuals.tolist(),
            "standardized_residuals": self.standardized_residuals.tolist(),
            "weights": {"p": w.p, "alpha": w.alpha.tolist(), "delta": w.delta.tolist(),
                        "delta_x": w.delta_x.tolist(), "t": w.t.tolist()},
            "iterations": [{"intercept": it.intercept, "coefficients": it.coefficients.tolist(),
                            "scale": it.scale} for it in self.iterations],
        }

    @classmethod
    def from_dict(cls, d):
        arr = lambda v: np.asarray(v, dtype=float)  # noqa: E731
        w = d["weights"]
        weights = WeightSet(arr(w["alpha"]), arr(w["delta"]), arr(w["delta_x"]), arr(w["t"]), float(w["p"]))
        its = tuple(IterationRecord(float(it["intercept"]), arr(it["coefficients"]), float(it["scale"]))
                    for it in d["iterations"])
        return cls(float(d["intercept"]), arr(d["coefficients"]), float(d["scale"]), weights,
                   arr(d["residuals"]), arr(d["standardized_residuals"]), d["method"], its)


def compute_alpha_delta(t, p):
    """Coefficients of the linearisation ``g(z) ~ alpha + delta * z`` at ``z = t``.

    ``alpha = (t/q) / (1 + t**2/q)**2`` and ``delta = 1 / (1 + t**2/q)**2``
    with ``q = 2p - 3``.  Infinite ``t`` (possible after an exact fit) gives
    ``alpha = delta = 0``.
    """
    if not p >= 2:
        raise InvalidParams(f"shape p must be >= 2, got {p}")
    q = 2.0 * p - 3.0
    t = np.asarray(t, dtype=float)
    with np.errstate(over="ignore"):
        u = 1.0 + t * t / q
        delta = 1.0 / (u * u)
    finite = np.isfinite(t)
    alpha = np.where(finite, np.where(finite, t, 0.0) / q * delta, 0.0)
    return alpha, delta


def compute_delta_x(X, p):
    """Leverage weights ``1 / (1 + xt**2/q)**4``.

    ``xt`` is the distance of each row of `X` to the L1-median divided by
    the median of those distances.
    """
    q = 2.0 * p - 3.0
    xt = scaled_leverage_distance(X)
    return 1.0 / (1.0 + xt * xt / q) ** 4


def solve_modified_likelihood(data, alpha, delta, delta_x, p, *, intercept_correction=True):
    """Closed-form solution of the linearised likelihood equations.

    Observations enter with weight ``d = delta * delta_x``; ``a = alpha *
    delta_x``.  After centring ``y`` and ``X`` at their ``d``-weighted means
    (``G = Xc' D Xc``)::

        K = G^-1 Xc' D yc,   L = G^-1 Xc' a,   e = yc - Xc K
        B = (2p/q) e'a,      C = (2p/q) e' D e
        scale = (B + sqrt(B**2 + 4 n C)) / (2 sqrt(n (n - m - 1)))
        coefficients = K + L * scale
        intercept = ybar - xbar' coefficients [+ (sum(a) / sum(d)) * scale]

    The bracketed intercept term is included when `intercept_correction`
    is true (RAMML) and omitted otherwise (AMML).
    """
    y, X = data.y, data.X
    n, m = X.shape
    q = 2.0 * p - 3.0
    alpha, delta, delta_x = (np.asarray(v, dtype=float) for v in (alpha, delta, delta_x))
    for name, v in (("alpha", alpha), ("delta", delta), ("delta_x", delta_x)):
        if v.shape != (n,):
            raise DimensionMismatch(f"{name} has shape {v.shape}, expected ({n},)")
    d = delta * delta_x
    a = alpha * delta_x
    w = d.sum()
    if not w > 0:
        raise ZeroTotalWeight("combined weights sum to zero")
    ybar = d @ y / w
    xbar = d @ X / w
    yc = y - ybar
    Xc = X - xbar
    Xd = Xc * d[:, None]
    KL = solve_spd(Xd.T @ Xc, np.column_stack([Xd.T @ yc, Xc.T @ a]))
    K, L = KL[:, 0], KL[:, 1]
    e = yc - Xc @ K
    B = 2.0 * p / q * float(e @ a)
    C = 2.0 * p / q * float(e @ (d * e))
    assert C >= 0.0
    scale = (B + math.sqrt(B * B + 4.0 * n * C)) / (2.0 * math.sqrt(n * (n - m - 1)))
    coef = K + L * scale
    intercept = ybar - xbar @ coef
    if intercept_correction:
        intercept += a.sum() / w * scale
    return ModifiedLikelihoodSolution(float(intercept), coef, float(scale), K, L, B, C)


def standardize(residuals, scale, ref=1.0):
    """``residuals / scale``; for zero scale, 0 for (near-)zero residuals and +-inf otherwise."""
    r = np.asarray(residuals, dtype=float)
    if scale > 0:
        return r / scale
    tiny = 1e-9 * ref
    return np.where(np.abs(r) <= tiny, 0.0, np.copysign(np.inf, r))


def _spread(y):
    return max(float(np.max(np.abs(y - np.median(y)))), 1e-300)


def fit(data, config=None, initial=None):
    """Fit AMML or RAMML.

    Iteration 1 linearises at the standardised residuals of the starting
    fit (LTS or S, computed here unless passed as `initial`).  Each later
    iteration linearises at the residuals of the previous one.  Leverage
    weights depend on ``X`` only and are computed once.

    Raises
    ------
    DegenerateScale
        If a scale estimate collapses to zero although the weighted
        observations are not fitted exactly.
    """
    if not isinstance(data, RegressionData):
        raise TypeError("expected a RegressionData instance")
    config = EstimatorConfig() if config is None else config
    p = config.p
    if initial is None:
        initial = _STARTERS[config.initializer](data, config.seed)
    robust = config.variant is Variant.RAMML
    delta_x = compute_delta_x(data.X, p) if robust else np.ones(data.n)
    y, X = data.y, data.X
    ref = _spread(y)

    intercept, coef, scale = initial.intercept, np.asarray(initial.coefficients, dtype=float), initial.scale
    trace = []
    weights = None
    for _ in range(config.iterations):
        t = standardize(y - intercept - X @ coef, scale, ref)
        alpha, delta = compute_alpha_delta(t, p)
        weights = WeightSet(alpha, delta, delta_x, t, p)
        sol = solve_modified_likelihood(data, alpha, delta, delta_x, p, intercept_correction=robust)
        intercept, coef, scale = sol.intercept, sol.coefficients, sol.scale
        trace.append(IterationRecord(intercept, coef.copy(), scale))
        if scale <= SCALE_TOLERANCE * ref:
            r = y - intercept - X @ coef
            if np.all(np.abs(r[weights.combined > 0]) <= 1e-8 * ref):
                scale = 0.0
                trace[-1] = IterationRecord(intercept, coef.copy(), scale)
                break
            raise DegenerateScale(f"scale estimate {scale:.3g} collapsed to zero")
    r = y - intercept - X @ coef
    return FitResult(intercept, coef, scale, weights, r, standardize(r, scale, ref),
                     config.method, tuple(trace), initial)


def fit_method(data, method, *, p=DEFAULT_SHAPE, seed=None, iterations=2, initial=None):
    """Shorthand: ``fit(data, EstimatorConfig.from_method(method, ...))``."""
    config = EstimatorConfig.from_method(method, p=p, seed=seed, iterations=iterations)
    return fit(data, config, initial=initial)


def final_weights(result):
    """Per-observation combined weight ``delta * delta_x`` of the last iteration."""
    return result.weights.combined.copy()
