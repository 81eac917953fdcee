import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ramml.datasets import RegressionData
from ramml.exceptions import AllTiesInV, DegenerateScale, TooFewObservations  # noqa: F401
from ramml.initial import (bisquare_rho, default_h, fit_lts, fit_median_slope, fit_mm, fit_ols, fit_s,
                           m_scale, median_slope_line)

from conftest import make_data


def lts_oracle(data, h):
    """Best OLS fit over all size-h subsets, by brute force."""
    A = data.design()
    best = (np.inf, None)
    for sub in itertools.combinations(range(data.n), h):
        sub = list(sub)
        beta, *_ = np.linalg.lstsq(A[sub], data.y[sub], rcond=None)
        r2 = np.sort((data.y - A @ beta) ** 2)[:h].sum()
        if r2 < best[0]:
            best = (r2, beta)
    return best


def _corpus():
    out = []
    for seed in range(6):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(6, 11))
        m = 1 if seed < 4 else 2
        X = rng.standard_normal((n, m))
        y = 2.0 - X.sum(axis=1) + 0.3 * rng.standard_normal(n)
        k = max(1, n // 4)
        y[:k] += rng.choice([-1, 1], k) * rng.uniform(5, 15, k)
        out.append(RegressionData(y, X))
    return out


CORPUS = _corpus()


# OLS -----------------------------------------------------------------------

def test_ols_matches_explicit_inverse():
    d = make_data(10, 2, seed=3)
    A = d.design()
    ref = np.linalg.inv(A.T @ A) @ A.T @ d.y
    f = fit_ols(d)
    np.testing.assert_allclose(f.params, ref, rtol=1e-10)
    r = d.y - A @ ref
    assert f.scale == pytest.approx(math.sqrt(r @ r / 7))


def test_ols_exact_line_and_constant():
    x = np.arange(8.0)
    f = fit_ols(RegressionData(2 * x, x))
    assert f.intercept == pytest.approx(0, abs=1e-12) and f.coefficients[0] == pytest.approx(2)
    assert f.scale == pytest.approx(0, abs=1e-12)
    f = fit_ols(RegressionData(np.full(8, 3.0), x))
    assert f.coefficients[0] == pytest.approx(0, abs=1e-12) and f.intercept == pytest.approx(3.0)


# LTS -----------------------------------------------------------------------

def test_default_h():
    assert default_h(47, 1) == 25
    assert default_h(23, 4) == 14
    assert default_h(8, 1) == 5


@pytest.mark.parametrize("idx", range(len(CORPUS)))
def test_lts_exact_mode_matches_exhaustive_oracle(idx):
    d = CORPUS[idx]
    h = default_h(d.n, d.m)
    obj, beta = lts_oracle(d, h)
    f = fit_lts(d, h=h, reweight=False)
    assert f.details["exact"]
    assert f.details["objective"] == pytest.approx(obj, rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(f.params, beta, rtol=1e-7, atol=1e-9)


def test_lts_two_gross_outliers_n8():
    x = np.arange(1.0, 9.0)
    y = 1.0 + 0.5 * x + np.array([0.1, -0.2, 0.05, 0.0, -0.1, 0.15, 0.0, 0.0])
    y[[2, 6]] += [20.0, -15.0]
    d = RegressionData(y, x)
    obj, beta = lts_oracle(d, 5)
    f = fit_lts(d, h=5, reweight=False)
    np.testing.assert_allclose(f.params, beta, rtol=1e-8)


def test_lts_exact_line_any_h():
    x = np.linspace(0, 1, 12)
    d = RegressionData(3 - x, x)
    for h in (7, 9, 12):
        f = fit_lts(d, h=h)
        np.testing.assert_allclose(f.params, [3, -1], atol=1e-10)
        assert f.details["objective"] == pytest.approx(0, abs=1e-20)
        assert f.scale == pytest.approx(0, abs=1e-10)


def test_lts_real_data(stars, aircraft):
    f = fit_lts(stars)
    np.testing.assert_allclose(f.params, [-8.5001, 3.0462], atol=1e-3)
    assert f.scale == pytest.approx(0.4562, abs=1e-3)
    f = fit_lts(aircraft)
    np.testing.assert_allclose(f.params[:3], [9.5007, -3.0488, 1.2100], atol=1e-3)
    assert f.scale == pytest.approx(5.6927, abs=1e-3)
    # The reweighting step drops exactly the two known outliers (1-based 16, 22).
    assert set(np.flatnonzero(f.weights == 0)) == {15, 21}


def test_lts_randomised_search_is_deterministic():
    d = make_data(60, 3, seed=9)
    a, b = fit_lts(d, seed=4), fit_lts(d, seed=4)
    assert np.array_equal(a.params, b.params) and a.scale == b.scale


def test_lts_smallest_admissible_sample():
    d = RegressionData(np.array([0.0, 1.0, 2.5, 2.9]), np.random.default_rng(0).standard_normal((4, 2)))
    f = fit_lts(d)
    assert f.details["exact"] and np.all(np.isfinite(f.params))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.2, 20))
def test_lts_equivariance(seed, c0, c1, scale):
    d = make_data(10, 1, seed)
    base = fit_lts(d)
    moved = fit_lts(d.with_response(scale * (d.y + c0 + c1 * d.X[:, 0])))
    np.testing.assert_allclose(moved.params, scale * (base.params + [c0, c1]), rtol=1e-8, atol=1e-8)
    assert moved.scale == pytest.approx(scale * base.scale, rel=1e-8)


def test_randomised_lts_regression_equivariance():
    d = make_data(40, 2, seed=5)
    g = np.array([1.5, -0.5])
    base = fit_lts(d, seed=1)
    moved = fit_lts(d.with_response(d.y + 2.0 + d.X @ g), seed=1)
    np.testing.assert_allclose(moved.params, base.params + np.r_[2.0, g], atol=1e-6)


# S and MM ------------------------------------------------------------------

def test_m_scale_solves_its_equation():
    r = np.random.default_rng(0).standard_cauchy(40)
    s = m_scale(r, dof=38)
    assert bisquare_rho(r / s, 1.54764).sum() / 38 == pytest.approx(0.5, rel=1e-9)


def test_s_real_data(stars, aircraft):
    f = fit_s(stars)
    np.testing.assert_allclose(f.params, [-9.5708, 3.2904], atol=2e-3)
    assert f.scale == pytest.approx(0.4715, abs=1e-3)
    f = fit_s(aircraft)
    np.testing.assert_allclose(f.params[1:3], [-4.0220, 1.5413], atol=2e-3)
    assert f.scale == pytest.approx(5.8932, abs=1e-3)


def test_s_scale_beats_ols_residual_scale():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(10)
    y = 1 + x + 0.1 * rng.standard_normal(10)
    x[0], y[0] = 8.0, -5.0
    d = RegressionData(y, x)
    f = fit_s(d)
    ols_r = d.y - fit_ols(d).predict(d.X)
    assert f.scale <= m_scale(ols_r, dof=8)


def test_s_exact_line():
    x = np.arange(10.0)
    f = fit_s(RegressionData(1 + 2 * x, x))
    np.testing.assert_allclose(f.params, [1, 2], atol=1e-9)
    assert f.scale == pytest.approx(0, abs=1e-9)


def test_s_too_few():
    with pytest.raises(TooFewObservations):
        fit_s(RegressionData(np.arange(4.0), np.arange(4.0)))


def test_mm_real_data(stars, aircraft):
    np.testing.assert_allclose(fit_mm(stars).params, [-4.9694, 2.2532], atol=1e-3)
    np.testing.assert_allclose(fit_mm(aircraft).params[1:3], [-3.2306, 1.6713], atol=1e-3)


def test_mm_close_to_ols_on_clean_data():
    d = make_data(200, 1, seed=12)
    mm, ols = fit_mm(d, seed=0), fit_ols(d)
    A = d.design()
    se = ols.scale * np.sqrt(np.diag(np.linalg.inv(A.T @ A)))
    assert np.all(np.abs(mm.params - ols.params) < 3 * se)
    assert mm.converged


def test_mm_iteration_cap_is_flagged(stars):
    f = fit_mm(stars, max_iter=1)
    assert not f.converged and np.all(np.isfinite(f.params))


# median slope ----------------------------------------------------------------

def test_median_slope_hand_example():
    d = RegressionData(np.array([1.0, 2.0, 4.0]), np.array([1.0, 2.0, 3.0]))
    # Slopes (1, 2) give theta 1.5; y - 1.5 x = (-0.5, -1, -0.5).
    assert median_slope_line(d) == pytest.approx((-0.5, 1.5))
    # Two of the three residuals are then zero, so the scale degenerates.
    with pytest.raises(DegenerateScale):
        fit_median_slope(d)


def test_median_slope_scale():
    d = RegressionData(np.array([1.0, 2.0, 4.0, 3.0]), np.array([1.0, 2.0, 3.0, 5.0]))
    f = fit_median_slope(d)
    # Slopes (1, 2, -0.5): theta 1; y - x = (0, 0, 1, -2): intercept 0.
    assert (f.intercept, f.coefficients[0]) == pytest.approx((0.0, 1.0))
    assert f.scale == pytest.approx(1.483 * 0.5)


def test_median_slope_exact_line_is_degenerate():
    x = np.arange(6.0)
    with pytest.raises(DegenerateScale):
        fit_median_slope(RegressionData(2 * x + 1, x))


def test_median_slope_all_ties():
    X = np.array([[1.0, 2.0], [2.0, 1.0], [0.0, 3.0], [3.0, 0.0]])
    with pytest.raises(AllTiesInV):
        fit_median_slope(RegressionData(np.arange(4.0), X))


def test_median_slope_ignores_predictor_order():
    d = make_data(15, 3, seed=2)
    a = fit_median_slope(d)
    b = fit_median_slope(d.with_predictors(d.X[:, ::-1]))
    assert a.intercept == b.intercept and a.scale == b.scale
