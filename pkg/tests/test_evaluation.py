import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ramml.amml import fit_method
from ramml.evaluation import metric_report, mse_coefficients, mse_scale, sep, trim_count
from ramml.exceptions import InvalidParams

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_mse_examples():
    assert mse_coefficients([[1.0, 2.0], [1.0, 2.0]], [1.0, 2.0]) == 0.0
    assert mse_coefficients([[2.0, 2.0]], [1.0, 2.0]) == 1.0
    est = [[1.0, 0.0], [0.0, 2.0], [3.0, 4.0]]
    assert mse_coefficients(est, [0.0, 0.0]) == pytest.approx((1 + 4 + 25) / 3)
    assert mse_scale([1.0, 1.0], 1.0) == 0.0
    assert mse_scale([1.5, 1.5, 1.5], 1.0) == pytest.approx(0.25)
    assert mse_scale([0.0, 2.0, 1.5], 1.0) == pytest.approx((1 + 1 + 0.25) / 3)


def test_sep_trivial_cases():
    y = np.array([1.0, 4.0, 2.0, 8.0, 5.0])
    assert sep(y, y) == (0.0, 0.0, 0.0)
    s, st_, b = sep(y, y - 3.0)
    assert b == pytest.approx(3.0) and s == pytest.approx(0.0, abs=1e-14)


def test_sep_hand_example():
    r = np.array([-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 10.0, 0.2, -0.4, 0.1])
    s, s_trim, bias = sep(r, np.zeros(10))
    assert bias == pytest.approx(0.94)
    assert s == pytest.approx(math.sqrt(np.sum((r - 0.94) ** 2) / 9))
    kept = np.sort(r)[1:-1]  # one from each tail at n = 10
    assert s_trim == pytest.approx(np.std(kept, ddof=1))


def test_trim_count():
    assert trim_count(47, 0.1) == 5
    assert trim_count(23, 0.1) == 2
    assert trim_count(10, 0.0) == 0


def test_sep_validation():
    with pytest.raises(InvalidParams):
        sep([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(InvalidParams):
        sep([1.0, 2.0, 3.0], [0.0, 0.0, 0.0], 0.5)


def test_starscyg_sep(stars):
    r = fit_method(stars, "RAMML2")
    s, s_trim, _ = sep(stars.y, r.predict(stars.X))
    assert s == pytest.approx(1.1277, abs=0.05)
    assert s_trim == pytest.approx(0.3252, abs=0.05)


def test_metric_report():
    rep = metric_report([1.0, 2.0, 3.0, 5.0], [1.0, 2.0, 3.0, 4.0])
    assert rep.bias == 0.25 and rep.trim_fraction == 0.1


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=3, max_size=40), finite)
def test_sep_shift_invariance(r, c):
    r = np.array(r)
    a = sep(r, np.zeros_like(r))
    b = sep(r + c, np.zeros_like(r))
    assert b[0] == pytest.approx(a[0], abs=1e-10 * (1 + abs(c) + np.abs(r).max()))
    assert b[1] == pytest.approx(a[1], abs=1e-10 * (1 + abs(c) + np.abs(r).max()))


@settings(max_examples=50, deadline=None)
@given(st.lists(finite, min_size=3, max_size=40))
def test_untrimmed_sep_equals_sep(r):
    r = np.array(r)
    s, s_trim, _ = sep(r, np.zeros_like(r), 0.0)
    assert s == s_trim


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(finite, min_size=2, max_size=2), min_size=1, max_size=20),
       st.floats(0.01, 100), st.randoms())
def test_mse_permutation_and_quadratic_scaling(est, c, rnd):
    truth = np.array([0.5, -1.0])
    est = np.array(est)
    base = mse_coefficients(est, truth)
    order = list(range(len(est)))
    rnd.shuffle(order)
    assert mse_coefficients(est[order], truth) == pytest.approx(base, rel=1e-12, abs=1e-12)
    scaled = truth + c * (est - truth)
    assert mse_coefficients(scaled, truth) == pytest.approx(c * c * base, rel=1e-9, abs=1e-12)
