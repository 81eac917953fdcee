"""Monte-Carlo engine: contaminated regression scenarios and MSE tables.

Every replication draws from its own random stream, derived from the
scenario seed, the clean-data part of the scenario ``(n, m, law, rho)``
and the replication index.  Results therefore do not depend on the number
of worker processes or on completion order, and a contaminated scenario
shares its uncontaminated rows with the clean scenario of the same seed.
"""
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import amml
from .datasets import RegressionData
from .distributions import ErrorLaw, sample_error, sample_predictors
from .evaluation import mse_coefficients, mse_scale
from .exceptions import DegenerateDirection, InvalidParams, RammlError
from .initial import fit_lts, fit_mm, fit_ols, fit_s

ESTIMATORS = ("MM", "LTS", "AMML1", "RAMML1", "S", "AMML2", "RAMML2", "OLS")


@dataclass(frozen=True)
class ScenarioSpec:
    """One simulation cell.

    The first ``floor(contamination * n)`` rows are replaced by leverage
    points ``x = leverage * 1``, ``y = x'a``.
    """

    n: int
    m: int
    error_law: ErrorLaw = ErrorLaw.NORMAL
    contamination: float = 0.0
    leverage: float = 10.0
    rho: float = 0.0
    n_rep: int = 500
    p: float = amml.DEFAULT_SHAPE
    estimators: tuple = ESTIMATORS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "error_law", ErrorLaw.parse(self.error_law))
        ests = tuple(self.estimators)
        unknown = [e for e in ests if e not in ESTIMATORS]
        if unknown or not ests:
            raise InvalidParams(f"unknown estimators {unknown}; choose from {', '.join(ESTIMATORS)}")
        object.__setattr__(self, "estimators", ests)
        if self.m < 1 or self.n <= self.m + 1:
            raise InvalidParams(f"need m >= 1 and n > m + 1, got n={self.n}, m={self.m}")
        if not 0 <= self.contamination < 0.5:
            raise InvalidParams(f"contamination must lie in [0, 0.5), got {self.contamination}")
        if self.contamination > 0 and not self.leverage > 0:
            raise InvalidParams("leverage must be positive when contamination > 0")
        if self.n_rep < 1:
            raise InvalidParams("n_rep must be positive")
        if self.p < 2:
            raise InvalidParams("shape p must be >= 2")

    @property
    def n_out(self):
        return int(math.floor(self.contamination * self.n + 1e-9))

    def stream_key(self):
        """Integer identifying the clean-data part of the scenario."""
        text = f"{self.n}|{self.m}|{self.error_law.value}|{float(self.rho)!r}"
        return zlib.crc32(text.encode())


@dataclass(frozen=True)
class TrueModel:
    beta0: float
    beta: np.ndarray
    a: np.ndarray


@dataclass(frozen=True)
class CellResult:
    """Per-estimator MSEs for one cell.

    ``failures[e]`` replications were excluded for estimator ``e`` (an error
    or a non-converged fit); ``n_used[e] + failures[e] == n_rep``.
    """

    scenario: ScenarioSpec
    mse_beta: dict
    mse_sigma: dict
    failures: dict
    n_used: dict = field(default_factory=dict)


def make_true_model(m):
    """``beta = 1/sqrt(m)``, and the unit leverage direction ``a`` orthogonal to it."""
    if m < 1:
        raise InvalidParams("m must be >= 1")
    beta = np.full(m, 1.0 / math.sqrt(m))
    if m == 1:
        return TrueModel(0.0, beta, np.array([-1.0]))
    nu = np.array([(-1.0) ** j for j in range(1, m + 1)])
    a = nu - (nu @ beta) * beta
    norm = np.linalg.norm(a)
    if not norm > 0:
        raise DegenerateDirection("leverage direction vanished")
    return TrueModel(0.0, beta, a / norm)


def _rep_streams(spec, rep_index):
    ss = np.random.SeedSequence(entropy=spec.seed, spawn_key=(spec.stream_key(), rep_index))
    return ss.spawn(3)


def generate_replication(spec, model, rep_index):
    """Data set number `rep_index` of the scenario."""
    sx, se, _ = _rep_streams(spec, rep_index)
    X = sample_predictors(spec.n, spec.m, spec.rho, seed=sx)
    eps = sample_error(spec.error_law, spec.n, seed=se)
    y = model.beta0 + X @ model.beta + eps
    k = spec.n_out
    if k:
        X[:k] = spec.leverage
        y[:k] = X[:k] @ model.a
    return RegressionData(y, X)


def _fit_seed(spec, rep_index):
    return int(_rep_streams(spec, rep_index)[2].generate_state(1)[0])


def fit_all(data, estimators, seed, p=amml.DEFAULT_SHAPE):
    """Fit the requested estimators; returns ``{tag: (coefficients, scale) or None}``.

    LTS and S fits are computed once and reused as starts for the
    corresponding AMML/RAMML variants and for MM.
    """
    cache = {}

    def start(name):
        if name not in cache:
            try:
                cache[name] = (fit_lts if name == "LTS" else fit_s)(data, seed=seed)
            except (RammlError, np.linalg.LinAlgError) as exc:
                cache[name] = exc
        if isinstance(cache[name], Exception):
            raise cache[name]
        return cache[name]

    out = {}
    for tag in estimators:
        try:
            if tag == "OLS":
                f = fit_ols(data)
            elif tag in ("LTS", "S"):
                f = start(tag)
            elif tag == "MM":
                f = fit_mm(data, s_fit=start("S"))
            else:
                init = start("LTS" if tag.endswith("1") else "S")
                f = amml.fit_method(data, tag, p=p, initial=init)
            ok = getattr(f, "converged", True) and np.all(np.isfinite(f.coefficients)) \
                and np.isfinite(f.scale)
            out[tag] = (np.asarray(f.coefficients), float(f.scale)) if ok else None
        except (RammlError, np.linalg.LinAlgError):
            out[tag] = None
    return out


def _run_reps(spec, reps):
    model = make_true_model(spec.m)
    results = []
    for r in reps:
        data = generate_replication(spec, model, r)
        results.append(fit_all(data, spec.estimators, _fit_seed(spec, r), spec.p))
    return results


def _resolve_workers(workers):
    if workers is None:
        workers = int(os.environ.get("RAMML_WORKERS", "1"))
    return max(1, int(workers))


def _chunks(n_rep, workers):
    size = max(1, math.ceil(n_rep / (4 * workers)))
    return [range(i, min(i + size, n_rep)) for i in range(0, n_rep, size)]


def _collect(jobs, workers):
    """Run ``(spec, reps)`` jobs, returning results in job order."""
    if workers == 1 or len(jobs) == 1:
        return [_run_reps(spec, reps) for spec, reps in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_reps, spec, reps) for spec, reps in jobs]
        return [f.result() for f in futures]


def _reduce(spec, per_rep):
    model = make_true_model(spec.m)
    mse_b, mse_s, fails, used = {}, {}, {}, {}
    for tag in spec.estimators:
        fits = [res[tag] for res in per_rep if res[tag] is not None]
        used[tag] = len(fits)
        fails[tag] = spec.n_rep - len(fits)
        if fits:
            mse_b[tag] = mse_coefficients([c for c, _ in fits], model.beta)
            mse_s[tag] = mse_scale([s for _, s in fits], 1.0)
        else:
            mse_b[tag] = mse_s[tag] = float("nan")
    return CellResult(spec, mse_b, mse_s, fails, used)


def run_table(specs, workers=None):
    """Run several cells; the output order follows `specs`.

    `workers` processes share the replications of all cells (default: the
    ``RAMML_WORKERS`` environment variable, else 1).
    """
    specs = list(specs)
    if not specs:
        return []
    workers = _resolve_workers(workers)
    jobs, owner = [], []
    for k, spec in enumerate(specs):
        for reps in _chunks(spec.n_rep, workers):
            jobs.append((spec, reps))
            owner.append(k)
    results = _collect(jobs, workers)
    per_cell = [[] for _ in specs]
    for k, res in zip(owner, results):
        per_cell[k].extend(res)
    return [_reduce(spec, rows) for spec, rows in zip(specs, per_cell)]


def run_cell(spec, workers=None):
    """Simulate one cell: MSE of slopes and of the scale (true sigma = 1)."""
    return run_table([spec], workers)[0]
