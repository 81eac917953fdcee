"""Performance criteria: Monte-Carlo MSE and the standard error of prediction."""
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, InvalidParams


@dataclass(frozen=True)
class MetricReport:
    sep: float
    sep_trim: float
    bias: float
    trim_fraction: float = 0.1
    mse_beta: float = None
    mse_sigma: float = None


def mse_coefficients(estimates, truth):
    """Mean over replications of ``||beta_hat - beta||**2`` (slopes only)."""
    truth = np.asarray(truth, dtype=float).ravel()
    est = np.asarray(estimates, dtype=float)
    if est.ndim == 1:
        est = est[None, :]
    if est.size == 0:
        raise InvalidParams("no estimates given")
    if est.shape[1] != truth.size:
        raise DimensionMismatch(f"estimates have length {est.shape[1]}, truth has {truth.size}")
    dev = est - truth
    return float(np.mean(np.einsum("ij,ij->i", dev, dev)))


def mse_scale(estimates, truth):
    """Mean of ``(sigma_hat - sigma)**2`` over replications."""
    est = np.asarray(estimates, dtype=float).ravel()
    if est.size == 0:
        raise InvalidParams("no estimates given")
    return float(np.mean((est - truth) ** 2))


def trim_count(n, trim_fraction):
    """Observations removed from *each* tail: ``trim_fraction * n`` rounded half up."""
    return int(math.floor(trim_fraction * n + 0.5))


def _centered_sd(r):
    bias = float(np.mean(r))
    return math.sqrt(float(np.sum((r - bias) ** 2)) / (r.size - 1)), bias


def sep(y, y_hat, trim_fraction=0.1):
    """Standard error of prediction and its trimmed version.

    ``SEP = sqrt(sum((r - bias)**2) / (n - 1))`` with ``r = y - y_hat`` and
    ``bias = mean(r)``.  The trimmed version sorts the residuals, drops
    :func:`trim_count` of them from each end and recomputes bias and SEP on
    the remainder.

    Returns
    -------
    (sep, sep_trim, bias)
    """
    r = np.asarray(y, dtype=float) - np.asarray(y_hat, dtype=float)
    if r.ndim != 1:
        raise DimensionMismatch("y and y_hat must be 1-d")
    if r.size < 3:
        raise InvalidParams("SEP needs at least 3 observations")
    if not 0 <= trim_fraction < 0.5:
        raise InvalidParams(f"trim_fraction must lie in [0, 0.5), got {trim_fraction}")
    full, bias = _centered_sd(r)
    g = trim_count(r.size, trim_fraction)
    if g == 0:
        return full, full, bias
    kept = np.sort(r)[g:r.size - g]
    if kept.size < 2:
        raise InvalidParams("trimming leaves fewer than 2 residuals")
    trimmed, _ = _centered_sd(kept)
    return full, trimmed, bias


def metric_report(y, y_hat, trim_fraction=0.1):
    s, st, b = sep(y, y_hat, trim_fraction)
    return MetricReport(s, st, b, trim_fraction)
