"""Regression data container and the two bundled real data sets.

``starsCYG`` (47 x 2) and ``aircraft`` (23 x 5) are the copies distributed
with the R package robustbase (via the Rdatasets collection), stored as
CSV under ``ramml/data``.
"""
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .exceptions import DimensionMismatch, InvalidParams, TooFewObservations


@dataclass(frozen=True)
class RegressionData:
    """Response ``y`` (n,) and predictors ``X`` (n, m); no intercept column."""

    y: np.ndarray
    X: np.ndarray
    response_name: str = "y"
    predictor_names: tuple = field(default=())

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if y.ndim != 1 or X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DimensionMismatch(f"incompatible shapes y{y.shape}, X{X.shape}")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise InvalidParams("data contain non-finite values")
        n, m = X.shape
        if m < 1:
            raise DimensionMismatch("need at least one predictor")
        if n <= m + 1:
            raise TooFewObservations(f"need n > m + 1, got n={n}, m={m}")
        names = tuple(self.predictor_names) or tuple(f"x{j + 1}" for j in range(m))
        if len(names) != m:
            raise DimensionMismatch(f"{len(names)} predictor names for {m} columns")
        y.setflags(write=False)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "predictor_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def m(self):
        return self.X.shape[1]

    def design(self):
        """``[1, X]``, the design matrix with an intercept column."""
        return np.column_stack([np.ones(self.n), self.X])

    def with_response(self, y):
        return RegressionData(y, self.X, self.response_name, self.predictor_names)

    def with_predictors(self, X):
        return RegressionData(self.y, X, self.response_name, self.predictor_names)


def _read_bundled(name):
    text = resources.files("ramml").joinpath("data", name).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = [h.strip() for h in lines[0].split(",")]
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return header, values


def load_starscyg():
    """Hertzsprung-Russell data of star cluster CYG OB1.

    Response ``log.light``, single predictor ``log.Te``.  Rows 11, 20, 30
    and 34 (1-based) are the giant stars.
    """
    header, values = _read_bundled("starsCYG.csv")
    return RegressionData(values[:, 1], values[:, [0]], header[1], (header[0],))


def load_aircraft():
    """Single-engine aircraft data: cost ``Y`` on ``X1..X4``."""
    header, values = _read_bundled("aircraft.csv")
    return RegressionData(values[:, 4], values[:, :4], header[4], tuple(header[:4]))


BUNDLED = {"starsCYG": load_starscyg, "aircraft": load_aircraft}


def bundled_path(name):
    """Filesystem path of a bundled CSV (``"starsCYG"`` or ``"aircraft"``)."""
    return resources.files("ramml").joinpath("data", f"{name}.csv")
