import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dpsep.perception import (
    PerceptionFamily,
    check_continuity,
    check_convexity_d1,
    check_subdecomposable,
    scaled_tv_family,
    tv_family,
    w2_squared_1d,
    w2sq_family,
)
from dpsep.probcore import product_extend, tv

from strategies import laws


def test_tv_family_values():
    f = tv_family()
    assert f.d1([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5)
    assert f.c_max == 1.0 and f.supports_block


def test_w2_closed_forms():
    # point masses at 0 and 1
    assert w2_squared_1d([0.0, 1.0], [1, 0], [0, 1]) == pytest.approx(1.0)
    # moving mass eps from 0 to 2 costs eps * 4
    assert w2_squared_1d([0.0, 1.0, 2.0], [1, 0, 0], [0.9, 0, 0.1]) == pytest.approx(0.4)
    # unsorted support points give the same answer
    assert w2_squared_1d([2.0, 0.0, 1.0], [0, 1, 0], [0.1, 0.9, 0]) == pytest.approx(0.4)


def test_w2_matches_sorted_sample_formula():
    # equal-weight laws: W2^2 is the mean squared gap between sorted atoms
    pts = np.array([0.0, 1.0, 3.0, 4.0])
    p = np.array([0.5, 0.5, 0, 0])
    q = np.array([0, 0, 0.5, 0.5])
    assert w2_squared_1d(pts, p, q) == pytest.approx(0.5 * 9 + 0.5 * 9)


def test_w2sq_block_needs_product_laws():
    f = w2sq_family([0.0, 1.0])
    p = product_extend([0.5, 0.5], 2).probs
    q = product_extend([0.8, 0.2], 2).probs
    assert f(2, p, q) == pytest.approx(2 * 0.3)
    with pytest.raises(ValueError):
        f(2, np.array([0.5, 0, 0, 0.5]), q)
    assert f.c_max == pytest.approx(1.0)
    assert not f.supports_block


def test_tv_assumption_checks_pass():
    f = tv_family()
    for check in (check_subdecomposable, check_continuity, check_convexity_d1):
        rep = check(f, trials=300, seed=11)
        assert rep.passed, rep
        assert rep.worst_margin >= -1e-9


def test_scaled_tv_is_not_subdecomposable():
    # one equal segment and one differing segment: n TV exceeds the sum
    f = scaled_tv_family()
    p1, q1 = np.array([0.5, 0.5]), np.array([0.5, 0.5])
    p2, q2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    lhs = f(2, np.kron(p1, p2), np.kron(q1, q2))
    assert lhs == pytest.approx(2.0)
    assert f(1, p1, q1) + f(1, p2, q2) == pytest.approx(1.0)
    assert not check_subdecomposable(f, trials=200, seed=0).passed


def test_negative_family_fails_range():
    neg = PerceptionFamily("neg_tv", lambda n, p, q: -tv(p, q), 1.0, True)
    rep = check_subdecomposable(neg, trials=50, seed=0)
    assert not rep.passed and rep.violations > 0


def test_w2sq_single_letter_checks():
    f = w2sq_family([0.0, 1.0, 3.0])
    assert check_continuity(f, trials=200, seed=1).passed
    assert check_convexity_d1(f, trials=200, seed=1).passed
    with pytest.raises(ValueError):
        check_subdecomposable(f, trials=5)


def test_check_report_record_is_stable():
    rep = check_convexity_d1(tv_family(), trials=20, seed=3)
    assert list(rep.to_record()) == ["family", "assumption", "trials", "worst_margin", "pass"]
    assert rep.to_json() == check_convexity_d1(tv_family(), trials=20, seed=3).to_json()


@given(laws(size=3), laws(size=3), st.floats(0, 1))
def test_tv_d1_convex_in_second_argument(p, q, lam):
    f = tv_family()
    r = np.array([0.2, 0.3, 0.5])
    mix = lam * q + (1 - lam) * r
    assert f.d1(p, mix) <= lam * f.d1(p, q) + (1 - lam) * f.d1(p, r) + 1e-12
