"""Starting and benchmark estimators: OLS, LTS, S, MM and median-slope.

LTS and S search over elemental (size ``m + 1``) subsets.  When the number
of such subsets is small they are all enumerated, otherwise ``n_starts``
are drawn at random from the supplied seed, so every fit is a
deterministic function of ``(data, seed)``.  Candidate refinement is
vectorised across starts.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .datasets import RegressionData
from .exceptions import AllTiesInV, InvalidParams, SingularSystem, TooFewObservations
from .location import mad_scale
from .numerics import COND_LIMIT, solve_weighted_normal

#: Bisquare tuning giving a 50% breakdown S-estimator (b = 0.5).
S_TUNING = 1.54764
S_BREAKDOWN = 0.5
#: Bisquare tuning giving 95% Gaussian efficiency for the MM step.
MM_TUNING = 4.685061
#: Standardised-residual cutoff for the LTS reweighting step.
LTS_REWEIGHT_CUTOFF = stats.norm.ppf(0.9875)


@dataclass(frozen=True)
class InitialFit:
    """Intercept, slopes and residual scale from one of the starting estimators.

    ``weights`` holds the estimator's own final observation weights when it
    has any (hard 0/1 weights for LTS, bisquare weights for S and MM).
    ``details`` carries method-specific extras such as the raw LTS fit.
    """

    intercept: float
    coefficients: np.ndarray
    scale: float
    method: str
    weights: np.ndarray = None
    converged: bool = True
    details: dict = field(default_factory=dict, repr=False)

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        return self.intercept + X @ self.coefficients

    def residuals(self, data):
        return data.y - self.predict(data.X)

    @property
    def params(self):
        """``[intercept, coefficients...]`` as one vector."""
        return np.concatenate([[self.intercept], self.coefficients])


def _fit_from_params(params, scale, method, **kw):
    params = np.asarray(params, dtype=float)
    return InitialFit(float(params[0]), params[1:].copy(), float(scale), method, **kw)


# ---------------------------------------------------------------------------
# batched linear algebra helpers


def _solve_batch(G, rhs):
    """Solve a stack of SPD systems; rows whose system is singular come back NaN."""
    d = np.sqrt(np.abs(np.einsum("kii->ki", G)))
    ok = np.all(d > 0, axis=1)
    out = np.full(rhs.shape, np.nan)
    if not ok.any():
        return out
    dk = d[ok]
    Gs = G[ok] / (dk[:, :, None] * dk[:, None, :])
    good = np.linalg.cond(Gs) < COND_LIMIT
    idx = np.flatnonzero(ok)[good]
    if idx.size:
        z = np.linalg.solve(Gs[good], (rhs[ok][good] / dk[good])[..., None])[..., 0]
        out[idx] = z / dk[good]
    return out


def _solve_square_batch(M, rhs):
    """Exact fits through stacks of ``p x p`` systems (elemental subsets)."""
    norms = np.linalg.norm(M, axis=1)
    ok = np.all(norms > 0, axis=1)
    out = np.full(rhs.shape, np.nan)
    if not ok.any():
        return out
    Ms = M[ok] / norms[ok][:, None, :]
    good = np.linalg.cond(Ms) < COND_LIMIT
    idx = np.flatnonzero(ok)[good]
    if idx.size:
        z = np.linalg.solve(Ms[good], rhs[ok][good][..., None])[..., 0]
        out[idx] = z / norms[ok][good]
    return out


def _weighted_ls_batch(A, y, W):
    """Row-wise weighted LS: ``W`` is ``(K, n)``; returns ``(K, p)``."""
    AW = W[:, :, None] * A[None, :, :]
    G = np.einsum("kni,nj->kij", AW, A)
    rhs = np.einsum("kni,n->ki", AW, y)
    return _solve_batch(G, rhs)


def _subset_ls_batch(A, y, idx):
    As = A[idx]
    ys = y[idx]
    G = np.einsum("khi,khj->kij", As, As)
    rhs = np.einsum("khi,kh->ki", As, ys)
    return _solve_batch(G, rhs)


def _elemental_starts(A, y, rng, n_starts, exhaustive_limit):
    n, p = A.shape
    if math.comb(n, p) <= exhaustive_limit:
        subsets = np.array(list(itertools.combinations(range(n), p)), dtype=np.intp)
    else:
        subsets = np.argpartition(rng.random((n_starts, n)), p - 1, axis=1)[:, :p]
    B = _solve_square_batch(A[subsets], y[subsets])
    return B[np.all(np.isfinite(B), axis=1)]


def _check_data(data):
    if not isinstance(data, RegressionData):
        raise TypeError("expected a RegressionData instance")
    return data.design(), data.y


# ---------------------------------------------------------------------------
# OLS


def fit_ols(data):
    """Ordinary least squares with ``scale = sqrt(RSS / (n - m - 1))``."""
    A, y = _check_data(data)
    params = solve_weighted_normal(A, np.ones(data.n), y)
    r = y - A @ params
    scale = math.sqrt(float(r @ r) / (data.n - data.m - 1))
    return _fit_from_params(params, scale, "OLS")


# ---------------------------------------------------------------------------
# LTS

# Small-sample correction constants for LTS scales with an intercept
# (Pison, Van Aelst and Willems, 2002).  For one slope: (log-coefficient,
# exponent) at alpha = 0.5 and alpha = 0.875.  For more slopes: rows of
# (alpha_q, beta_q, q) used to interpolate in the number of slopes.
_LTS_SMALL_SAMPLE = {
    "raw": {
        "one": ((0.630869217886906, 0.650789250442946), (0.565065391014791, 1.03044199012509)),
        "multi": (
            ((-0.746945886714663, 0.56264937192689, 3), (-0.535478048924724, 0.543323462033445, 5)),
            ((-0.458580153984614, 1.12236071104403, 3), (-0.267178168108996, 1.1022478781154, 5)),
        ),
    },
    "reweighted": {
        "one": ((1.58609654199605, 1.46340162526468), (0.391653958727332, 1.03167487483316)),
        "multi": (
            ((-0.773365715932083, 2.02013996406346, 3), (-0.337571678986723, 2.02037467454833, 5)),
            ((-0.474174840843602, 1.39681715704956, 3), (-0.276640353112907, 1.42543242287677, 5)),
        ),
    },
}


def _lts_small_sample_factor(m, n, alpha, kind):
    table = _LTS_SMALL_SAMPLE[kind]
    if m == 1:
        f500, f875 = (1.0 - math.exp(a) / n ** b for a, b in table["one"])
    else:
        fs = []
        for rows in table["multi"]:
            rows = np.array(rows)
            yv = np.log(-rows[:, 0] / m ** rows[:, 1])
            M = np.column_stack([np.ones(2), -np.log(rows[:, 2] * m * m)])
            c0, c1 = np.linalg.solve(M, yv)
            fs.append(1.0 - math.exp(c0) / n ** c1)
        f500, f875 = fs
    if alpha <= 0.875:
        f = f500 + (f875 - f500) / 0.375 * (alpha - 0.5)
    else:
        f = f875 + (1.0 - f875) / 0.125 * (alpha - 0.875)
    return 1.0 / f if f > 0 else 1.0


def _trimmed_consistency(h, n):
    """Factor making ``sqrt(mean of the h smallest r**2)`` consistent at the normal."""
    if h >= n:
        return 1.0
    q = stats.norm.ppf((h + n) / (2.0 * n))
    return 1.0 / math.sqrt(1.0 - 2.0 * n / h * q * stats.norm.pdf(q))


def default_h(n, m, alpha=0.5):
    """Subset size used by LTS for coverage `alpha` (maximal breakdown at 0.5)."""
    p = m + 1
    half = (n + p + 1) // 2
    return int(math.floor(2 * half - n + 2 * (n - half) * alpha))


def _trimmed_objective(A, y, B, h):
    R2 = (y[None, :] - B @ A.T) ** 2
    return np.partition(R2, h - 1, axis=1)[:, :h].sum(axis=1)


def _csteps(A, y, B, h, n_steps):
    for _ in range(n_steps):
        R2 = (y[None, :] - B @ A.T) ** 2
        idx = np.argpartition(R2, h - 1, axis=1)[:, :h]
        B_new = _subset_ls_batch(A, y, idx)
        bad = ~np.all(np.isfinite(B_new), axis=1)
        B_new[bad] = B[bad]
        B = B_new
    return B


def _concentrate(A, y, beta, h, max_steps=100):
    """C-steps on a single fit until the trimmed objective stops decreasing."""
    obj = _trimmed_objective(A, y, beta[None], h)[0]
    for _ in range(max_steps):
        cand = _csteps(A, y, beta[None], h, 1)[0]
        new_obj = _trimmed_objective(A, y, cand[None], h)[0]
        if not new_obj < obj:
            break
        beta, obj = cand, new_obj
    return beta, obj


def lts_exhaustive(A, y, h):
    """Exact LTS: best least-squares fit over every size-`h` subset."""
    n = A.shape[0]
    best_obj, best = np.inf, None
    chunk = 4096
    it = itertools.combinations(range(n), h)
    while True:
        block = np.array(list(itertools.islice(it, chunk)), dtype=np.intp)
        if block.size == 0:
            break
        B = _subset_ls_batch(A, y, block)
        B = B[np.all(np.isfinite(B), axis=1)]
        if not len(B):
            continue
        obj = _trimmed_objective(A, y, B, h)
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_obj, best = obj[k], B[k]
    if best is None:
        raise SingularSystem("every h-subset gives a singular design")
    return best, best_obj


def fit_lts(data, h=None, seed=None, *, alpha=None, n_starts=500, n_csteps=2, n_best=10,
            exhaustive_limit=1500, exact_limit=5000, reweight=True):
    """Least trimmed squares with the usual reweighting step.

    Minimises the sum of the `h` smallest squared residuals.  When there are
    at most `exact_limit` subsets of size `h` all of them are tried, which
    gives the exact minimiser.  Otherwise FAST-LTS is run: elemental
    starts (all of them if there are at most `exhaustive_limit`, else
    `n_starts` random ones), `n_csteps` concentration steps each, then the
    `n_best` best candidates are concentrated to convergence.

    The raw scale is the trimmed RMS residual times a normal consistency
    factor and a small-sample correction.  With ``reweight=True`` (the
    default) observations whose standardised raw residual exceeds
    ``qnorm(0.9875)`` are dropped and the returned fit is the least-squares
    fit on the rest, with its own corrected scale.  The raw fit is kept in
    ``details``.
    """
    A, y = _check_data(data)
    n, m = data.n, data.m
    p = m + 1
    if n < m + 2:
        raise TooFewObservations(f"LTS needs n >= m + 2, got n={n}, m={m}")
    if h is None:
        alpha = 0.5 if alpha is None else float(alpha)
        if not 0.5 <= alpha <= 1:
            raise InvalidParams("alpha must lie in [0.5, 1]")
        h = default_h(n, m, alpha)
    else:
        h = int(h)
        alpha = max(0.5, h / n) if alpha is None else float(alpha)
    if not default_h(n, m) <= h <= n:
        raise InvalidParams(f"h must lie in [{default_h(n, m)}, {n}], got {h}")

    exact = math.comb(n, h) <= exact_limit
    if exact:
        beta, obj = lts_exhaustive(A, y, h)
        beta, obj = _concentrate(A, y, beta, h)
    else:
        rng = np.random.default_rng(seed)
        B = _elemental_starts(A, y, rng, n_starts, exhaustive_limit)
        if not len(B):
            raise SingularSystem("no non-singular elemental subset found")
        B = _csteps(A, y, B, h, n_csteps)
        obj = _trimmed_objective(A, y, B, h)
        order = np.argsort(obj, kind="stable")[:n_best]
        best_obj, beta = np.inf, None
        for k in order:
            cand, cand_obj = _concentrate(A, y, B[k], h)
            if cand_obj < best_obj:
                best_obj, beta = cand_obj, cand
        obj = best_obj

    raw_scale = math.sqrt(obj / h) * _trimmed_consistency(h, n) \
        * _lts_small_sample_factor(m, n, alpha, "raw")
    r = y - A @ beta
    details = {"h": h, "alpha": alpha, "objective": float(obj), "exact": exact,
               "raw_intercept": float(beta[0]), "raw_coefficients": beta[1:].copy(),
               "raw_scale": raw_scale}
    if raw_scale <= 0 or not reweight:
        weights = (np.abs(r) <= (raw_scale * LTS_REWEIGHT_CUTOFF if raw_scale > 0 else 0)).astype(float)
        return _fit_from_params(beta, raw_scale, "LTS", weights=weights, details=details)

    keep = np.abs(r / raw_scale) <= LTS_REWEIGHT_CUTOFF
    n_keep = int(keep.sum())
    if n_keep <= p:
        return _fit_from_params(beta, raw_scale, "LTS", weights=keep.astype(float), details=details)
    w = keep.astype(float)
    params = solve_weighted_normal(A, w, y)
    r = y - A @ params
    scale = math.sqrt(float(w @ r ** 2) / (n_keep - 1)) * _trimmed_consistency(n_keep, n) \
        * _lts_small_sample_factor(m, n, alpha, "reweighted")
    return _fit_from_params(params, scale, "LTS", weights=w, details=details)


# ---------------------------------------------------------------------------
# S and MM (Tukey bisquare)


def bisquare_rho(u, c):
    """Bisquare rho normalised to a maximum of one."""
    v2 = np.minimum(np.square(u) / (c * c), 1.0)
    w = 1.0 - v2
    return 1.0 - w * w * w


def bisquare_weight(u, c):
    """``psi(u) / u`` for the bisquare, up to a constant factor."""
    v = np.abs(u) / c
    return np.where(v < 1.0, (1.0 - v * v) ** 2, 0.0)


def m_scale(residuals, c=S_TUNING, b=S_BREAKDOWN, dof=None, start=None, tol=1e-10, max_iter=200):
    """M-scale ``s`` solving ``sum(rho(r / s)) / dof = b``.

    Works row-wise on 2-d input.  `dof` defaults to the number of residuals;
    the regression S-estimator passes ``n - (m + 1)``.
    """
    R = np.atleast_2d(np.abs(np.asarray(residuals, dtype=float)))
    n = R.shape[1]
    dof = n if dof is None else dof
    target = dof * b
    s = np.median(R, axis=1) / 0.6745 if start is None else np.array(start, dtype=float).reshape(-1)
    active = s > 0
    # Newton steps in log(s); fall back to the fixed-point update
    # s * sqrt(F / target) where the derivative vanishes.
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        s_old = s[idx]
        v2 = np.minimum(np.square(R[idx] / s_old[:, None]) / (c * c), 1.0)
        w = 1.0 - v2
        F = (1.0 - w * w * w).sum(axis=1)
        D = 6.0 * (v2 * w * w).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(D > 1e-8 * target, (F - target) / D, 0.5 * np.log(F / target))
        step = np.clip(step, -1.0, 1.0)
        s_new = s_old * np.exp(step)
        s[idx] = s_new
        active[idx] = np.abs(step) > tol
    s = np.where(np.isfinite(s), s, 0.0)
    return s if np.ndim(residuals) > 1 else float(s[0])


def _s_refine(A, y, beta, c, b, dof, max_iter, tol):
    r = y - A @ beta
    s = m_scale(r, c, b, dof)
    for it in range(max_iter):
        if s <= 0:
            return beta, 0.0, True
        w = bisquare_weight(r / s, c)
        try:
            new = solve_weighted_normal(A, w, y)
        except SingularSystem:
            return beta, s, False
        step = np.linalg.norm(new - beta)
        beta = new
        r = y - A @ beta
        s_old, s = s, m_scale(r, c, b, dof, start=s)
        # On flat stretches the coefficients can creep for many steps while
        # the scale (the objective) no longer moves; count that as converged.
        if step <= tol * max(np.linalg.norm(beta), 1e-300) or abs(s - s_old) <= 1e-12 * s_old:
            return beta, s, True
    return beta, s, False


def fit_s(data, seed=None, *, c=S_TUNING, b=S_BREAKDOWN, n_starts=500, k_fast=2, best_r=5,
          max_refine=200, tol=1e-7, exhaustive_limit=1500):
    """Regression S-estimator with the bisquare rho (Fast-S search).

    The scale is the M-scale of the residuals with divisor ``n - m - 1``.
    Each elemental start receives `k_fast` reweighting steps; the `best_r`
    starts with the smallest scale are refined to convergence and the one
    with the smallest final scale wins.
    """
    A, y = _check_data(data)
    n, m = data.n, data.m
    if n <= 2 * (m + 1):
        raise TooFewObservations(f"S-estimator needs n > 2(m + 1), got n={n}, m={m}")
    dof = n - m - 1
    rng = np.random.default_rng(seed)
    B = _elemental_starts(A, y, rng, n_starts, exhaustive_limit)
    if not len(B):
        raise SingularSystem("no non-singular elemental subset found")
    # Candidate ranking only needs a rough scale.
    s = None
    for _ in range(k_fast):
        R = y[None, :] - B @ A.T
        s = m_scale(R, c, b, dof, start=s if s is not None and np.all(s > 0) else None, tol=1e-6)
        pos = s > 0
        W = np.ones_like(R)
        W[pos] = bisquare_weight(R[pos] / s[pos, None], c)
        B_new = _weighted_ls_batch(A, y, W)
        bad = ~np.all(np.isfinite(B_new), axis=1)
        B_new[bad] = B[bad]
        B = B_new
    s = m_scale(y[None, :] - B @ A.T, c, b, dof, tol=1e-6)
    order = np.argsort(s, kind="stable")[:best_r]
    best = None
    for k in order:
        beta, scale, conv = _s_refine(A, y, B[k], c, b, dof, max_refine, tol)
        if best is None or scale < best[1]:
            best = (beta, scale, conv)
    beta, scale, conv = best
    r = y - A @ beta
    weights = bisquare_weight(r / scale, c) if scale > 0 else (r == 0).astype(float)
    return _fit_from_params(beta, scale, "S", weights=weights, converged=conv,
                            details={"tuning": c, "breakdown": b})


def fit_mm(data, seed=None, *, c=MM_TUNING, tol=1e-8, max_iter=200, s_fit=None, **s_kwargs):
    """MM-estimator: bisquare M-step at fixed S scale, started at the S fit.

    Iterates reweighted least squares until the relative change of the
    coefficient vector is at most `tol`.  If `max_iter` is reached the
    iterate with the smallest M-objective is returned with
    ``converged=False``.  The reported scale is the S scale.
    """
    A, y = _check_data(data)
    if s_fit is None:
        s_fit = fit_s(data, seed=seed, **s_kwargs)
    scale = s_fit.scale
    beta = s_fit.params
    if scale <= 0:
        return _fit_from_params(beta, scale, "MM", weights=s_fit.weights, details={"s_fit": s_fit})

    def objective(b):
        return bisquare_rho((y - A @ b) / scale, c).sum()

    best, best_obj = beta, objective(beta)
    converged = False
    for _ in range(max_iter):
        w = bisquare_weight((y - A @ beta) / scale, c)
        new = solve_weighted_normal(A, w, y)
        step = np.linalg.norm(new - beta)
        beta = new
        obj = objective(beta)
        if obj < best_obj:
            best, best_obj = beta, obj
        if step <= tol * max(np.linalg.norm(beta), 1e-300):
            converged = True
            best = beta
            break
    r = y - A @ best
    return _fit_from_params(best, scale, "MM", weights=bisquare_weight(r / scale, c),
                            converged=converged, details={"tuning": c, "s_fit": s_fit})


# ---------------------------------------------------------------------------
# Median-slope start on the common-slope reparametrisation


def median_slope_line(data):
    """``(intercept, theta)`` of the median-slope start, without the scale.

    ``theta`` is the median of slopes between consecutive observations of
    ``(v, y)`` in the given order, ``v`` the row sum of ``X``; pairs with
    tied ``v`` are skipped.  The intercept is ``median(y - theta v)``.
    """
    _check_data(data)
    y = data.y
    v = data.X.sum(axis=1)
    dv = np.diff(v)
    ok = dv != 0
    if not ok.any():
        raise AllTiesInV("all consecutive predictor sums are tied")
    theta = float(np.median(np.diff(y)[ok] / dv[ok]))
    return float(np.median(y - theta * v)), theta


def fit_median_slope(data):
    """Start values from the common-slope model ``y = b0 + theta * v``.

    Intercept and ``theta`` come from :func:`median_slope_line`; the scale
    is the MAD-type scale of the residuals.  The returned coefficients
    repeat ``theta`` for every predictor so that ``X @ coefficients ==
    theta * v``.

    Raises
    ------
    DegenerateScale
        When at least half of the residuals are zero (e.g. an exact line).
    """
    intercept, theta = median_slope_line(data)
    scale = mad_scale(data.y - intercept - theta * data.X.sum(axis=1))
    return InitialFit(intercept, np.full(data.m, theta), scale, "MedianSlope")
