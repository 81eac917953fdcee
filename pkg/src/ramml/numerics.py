"""Dense weighted least-squares kernel.

Everything here works on plain ``numpy`` arrays.  Matrices are ``(n, m)``
float arrays, vectors are 1-d.
"""
import numpy as np
from scipy import linalg

from .exceptions import DimensionMismatch, InvalidParams, SingularSystem, ZeroTotalWeight

#: Largest condition number (of the column-equilibrated Gram matrix) we accept.
COND_LIMIT = 1e12


def _as_matrix(X, name="X"):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidParams(f"{name} contains non-finite entries")
    return X


def _as_weights(w, n):
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise DimensionMismatch(f"weights have shape {w.shape}, expected ({n},)")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidParams("weights must be finite and non-negative")
    return w


def solve_spd(G, rhs, cond_limit=COND_LIMIT):
    """Solve ``G b = rhs`` for a symmetric positive (semi)definite ``G``.

    The matrix is scaled to unit diagonal before factorising, so the
    singularity test is insensitive to the units of the predictors.  One
    step of iterative refinement is applied.

    Raises
    ------
    SingularSystem
        If the equilibrated condition number exceeds `cond_limit`.
    """
    G = np.asarray(G, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or rhs.shape[0] != G.shape[0]:
        raise DimensionMismatch(f"cannot solve {G.shape} system with rhs {rhs.shape}")
    diag = np.diag(G)
    if not np.all(diag > 0):
        raise SingularSystem("Gram matrix has a non-positive diagonal entry")
    d = np.sqrt(diag)
    Gs = G / np.outer(d, d)
    cond = np.linalg.cond(Gs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularSystem(f"Gram matrix condition number {cond:.3g} exceeds {cond_limit:.1g}")
    scale = d if rhs.ndim == 1 else d[:, None]
    try:
        factor = linalg.cho_factor(Gs, lower=False, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    b = linalg.cho_solve(factor, rhs / scale, check_finite=False) / scale
    resid = rhs - G @ b
    b = b + linalg.cho_solve(factor, resid / scale, check_finite=False) / scale
    return b


def weighted_gram(X, w):
    """Return ``X' diag(w) X``."""
    X = _as_matrix(X)
    w = _as_weights(w, X.shape[0])
    return (X * w[:, None]).T @ X


def solve_weighted_normal(X, w, rhs):
    """Weighted least squares through the normal equations.

    Parameters
    ----------
    X : array_like, shape (n, m)
    w : array_like, shape (n,)
        Non-negative weights; at least ``m`` must be positive.
    rhs : array_like, shape (n,)

    Returns
    -------
    b : ndarray, shape (m,)
        Minimiser of ``sum(w * (rhs - X @ b)**2)``.
    """
    X = _as_matrix(X)
    n, m = X.shape
    w = _as_weights(w, n)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (n,):
        raise DimensionMismatch(f"rhs has shape {rhs.shape}, expected ({n},)")
    if n < m:
        raise DimensionMismatch(f"need n >= m, got n={n}, m={m}")
    if np.count_nonzero(w) < m:
        raise SingularSystem(f"only {np.count_nonzero(w)} positive weights for {m} unknowns")
    Xw = X * w[:, None]
    return solve_spd(Xw.T @ X, Xw.T @ rhs)


def weighted_column_means(X, w):
    """Column means of `X` under weights `w`."""
    X = _as_matrix(X)
    w = _as_weights(w, X.shape[0])
    total = w.sum()
    if not total > 0:
        raise ZeroTotalWeight("sum of weights must be positive")
    return w @ X / total
