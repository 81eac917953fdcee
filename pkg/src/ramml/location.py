"""Robust location and scale: L1-median, median, MAD and leverage distances."""
from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateScale, InvalidParams
from .numerics import _as_matrix

#: Normal-consistency constant applied to the median absolute residual.
MAD_CONSTANT = 1.483


@dataclass(frozen=True)
class L1MedianResult:
    center: np.ndarray
    iterations: int
    converged: bool


def _weiszfeld_step(X, c, atol):
    """One Weiszfeld update with the Vardi-Zhang fix for data-point iterates.

    Returns the new center and whether `c` already satisfies the
    (sub)gradient optimality condition.
    """
    diff = X - c
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    at_c = dist <= atol
    if np.all(at_c):
        return c, True
    inv = 1.0 / dist[~at_c]
    T = inv @ X[~at_c] / inv.sum()
    eta = np.count_nonzero(at_c)
    if eta == 0:
        return T, False
    # Resultant of unit vectors pulling away from the coincident point.
    R = (inv @ diff[~at_c])
    r = np.linalg.norm(R)
    if r <= eta:
        return c, True
    frac = eta / r
    return (1.0 - frac) * T + frac * c, False


def l1_median(X, tol=1e-10, max_iter=500):
    """Spatial (geometric) median of the rows of `X`.

    Minimises ``sum_i ||x_i - c||`` by Weiszfeld iteration started from the
    coordinate-wise median.  Iterates that land on a data point are handled
    with the Vardi-Zhang modification, so the algorithm converges to the
    optimum also when it is one of the observations.

    Iteration stops once a step is shorter than ``tol * (1 + ||c||)``.
    If `max_iter` is reached the last iterate is returned with
    ``converged=False``.
    """
    X = _as_matrix(X)
    if X.shape[0] < 1:
        raise InvalidParams("need at least one observation")
    if not tol > 0:
        raise InvalidParams("tol must be positive")
    if X.shape[0] == 1:
        return L1MedianResult(X[0].copy(), 0, True)
    c = np.median(X, axis=0)
    spread = np.max(np.abs(X - c))
    atol = 1e-14 * max(spread, 1e-300)
    for it in range(1, max_iter + 1):
        c_new, optimal = _weiszfeld_step(X, c, atol)
        if optimal:
            return L1MedianResult(c, it, True)
        step = np.linalg.norm(c_new - c)
        c = c_new
        if step <= tol * (1.0 + np.linalg.norm(c)):
            return L1MedianResult(c, it, True)
    return L1MedianResult(c, max_iter, False)


def median(v):
    """Sample median; the mean of the two middle order statistics for even n."""
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise InvalidParams("median of an empty vector")
    return float(np.median(v))


def mad_scale(residuals):
    """``1.483 * median(|r|)``.

    Raises
    ------
    DegenerateScale
        When at least half of the residuals are exactly zero.
    """
    s = MAD_CONSTANT * median(np.abs(residuals))
    if not s > 0:
        raise DegenerateScale("median absolute residual is zero")
    return s


def scaled_leverage_distance(X, tol=1e-10, max_iter=500):
    """Distances to the L1-median divided by their median.

    The result has median one and is invariant to translations, rotations
    and uniform rescaling of the predictor cloud.
    """
    X = _as_matrix(X)
    if X.shape[0] < 2:
        raise InvalidParams("need at least two observations")
    center = l1_median(X, tol=tol, max_iter=max_iter).center
    dist = np.linalg.norm(X - center, axis=1)
    med = np.median(dist)
    if not med > 0:
        raise DegenerateScale("over half of the points coincide with the L1-median")
    return dist / med
