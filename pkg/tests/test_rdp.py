import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpsep.perception import tv_family, w2sq_family
from dpsep.probcore import Channel, Dist, DistortionFn, bec, bernoulli, binary_entropy, bsc, h_inv, hamming, joint_mutual_info, mutual_info, tv, uniform
from dpsep.rdp import (
    SolverConfig,
    capacity_ba,
    drp_function,
    nocr_perfect_realism_D,
    points_from_csv,
    points_sidecar,
    points_to_csv,
    rate_constrained_plan,
    region_boundary,
    restoration_channel,
    weak_region_point,
)

TV = tv_family()
HAM = hamming()

# Frozen from tests/oracles.py (cvxpy + Clarabel on the joint-law convex program).
ORACLE = {
    "bern02_R03_P005": (([0.8, 0.2], 1 - np.eye(2), 0.3, 0.05), 0.08621015391206802),
    "bern02_R03_P0": (([0.8, 0.2], 1 - np.eye(2), 0.3, 0.0), 0.09634270237012921),
    "tern_R05_P01": (([0.5, 0.3, 0.2], 1 - np.eye(3), 0.5, 0.1), 0.22188348309047998),
    "tern_R05_P0": (([0.5, 0.3, 0.2], 1 - np.eye(3), 0.5, 0.0), 0.22957729534051752),
    "tern_abs_R04_P005": (
        ([0.2, 0.5, 0.3], np.abs(np.subtract.outer(np.arange(3), np.arange(3))), 0.4, 0.05),
        0.2978726034578196,
    ),
}


def z_channel_capacity(p):
    return math.log2(1 + (1 - p) * p ** (p / (1 - p)))


@pytest.mark.parametrize("p", [0.0, 0.05, 0.2, 0.5])
def test_capacity_bsc(p):
    C, law = capacity_ba(bsc(p))
    assert C == pytest.approx(1 - binary_entropy(p), abs=1e-9)
    np.testing.assert_allclose(law.probs, [0.5, 0.5], atol=1e-6)


def test_capacity_bec_and_z():
    assert capacity_ba(bec(0.3))[0] == pytest.approx(0.7, abs=1e-9)
    z = Channel([[1.0, 0.0], [0.3, 0.7]])
    C, law = capacity_ba(z)
    assert C == pytest.approx(z_channel_capacity(0.3), abs=1e-8)
    assert mutual_info(law, z) == pytest.approx(C, abs=1e-8)


def test_capacity_identity_is_log_alphabet():
    assert capacity_ba(Channel(np.eye(5)))[0] == pytest.approx(math.log2(5), abs=1e-9)


@pytest.mark.parametrize("R", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("P", [np.inf, 0.0])
def test_weak_binary_uniform_is_classical(R, P):
    pt = weak_region_point(uniform(2), HAM, TV, R, P)
    assert pt.D == pytest.approx(h_inv(1 - R), abs=1e-6)
    assert pt.info["I"] <= R + 1e-6


@pytest.mark.parametrize("key", sorted(ORACLE))
def test_weak_matches_frozen_oracle(key):
    (p, d, R, P), expected = ORACLE[key]
    pt = weak_region_point(Dist(p), DistortionFn(d), TV, R, P)
    assert pt.D == pytest.approx(expected, abs=1e-6)
    assert pt.info["d1"] <= P + 1e-6
    assert pt.info["I"] <= R + 1e-6


def test_weak_matches_live_cvxpy():
    pytest.importorskip("cvxpy")
    from oracles import weak_point_cvxpy

    rng = np.random.default_rng(2024)
    for _ in range(6):
        k = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(k))
        d = rng.random((k, k))
        np.fill_diagonal(d, 0.0)
        R = float(rng.uniform(0.0, 1.2))
        P = float(rng.choice([0.0, rng.uniform(0, 0.3), np.inf]))
        ours = weak_region_point(Dist(p), DistortionFn(d), TV, R, P).D
        assert ours == pytest.approx(weak_point_cvxpy(p, d, R, P), abs=1e-6)


def test_weak_bern_closed_form_without_perception():
    # classical D(R) of Bern(p): h(p) - h(D) = R
    p, R = 0.2, 0.3
    D = drp_function(bernoulli(p), HAM, TV, R, np.inf)
    assert binary_entropy(p) - binary_entropy(D) == pytest.approx(R, abs=1e-7)


def test_weak_extremes():
    assert weak_region_point(bernoulli(0.3), HAM, TV, 0.0, 0.0).D == pytest.approx(2 * 0.3 * 0.7, abs=1e-9)
    assert weak_region_point(bernoulli(0.3), HAM, TV, 0.0, np.inf).D == pytest.approx(0.3, abs=1e-9)
    assert weak_region_point(bernoulli(0.3), HAM, TV, 5.0, 0.0).D == pytest.approx(0.0, abs=1e-9)


def test_weak_with_w2sq_family():
    f = w2sq_family([0.0, 1.0])
    pt = weak_region_point(bernoulli(0.3), HAM, f, 0.0, 0.0)
    assert pt.D == pytest.approx(2 * 0.3 * 0.7, abs=1e-7)


def test_weak_rejects_bad_budgets():
    with pytest.raises(ValueError):
        weak_region_point(uniform(2), HAM, TV, -0.1, 0.0)


@settings(max_examples=12)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 0.3), st.floats(0.0, 0.3))
def test_weak_monotone_in_budgets(r1, r2, p1, p2):
    src = bernoulli(0.3)
    lo_r, hi_r = sorted((r1, r2))
    lo_p, hi_p = sorted((p1, p2))
    assert drp_function(src, HAM, TV, hi_r, lo_p) <= drp_function(src, HAM, TV, lo_r, lo_p) + 1e-7
    assert drp_function(src, HAM, TV, lo_r, hi_p) <= drp_function(src, HAM, TV, lo_r, lo_p) + 1e-7


@settings(max_examples=12)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 0.3), st.floats(0.0, 0.3))
def test_weak_midpoint_convex(r1, r2, p1, p2):
    src = Dist([0.5, 0.3, 0.2])
    d = DistortionFn(1 - np.eye(3))
    mid = drp_function(src, d, TV, 0.5 * (r1 + r2), 0.5 * (p1 + p2))
    avg = 0.5 * (drp_function(src, d, TV, r1, p1) + drp_function(src, d, TV, r2, p2))
    assert mid <= avg + 1e-6


@given(st.floats(0.0, 1.5), st.integers(0, 10**6))
def test_rate_constrained_plan_respects_constraints(rate, seed):
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    cost = rng.random((3, 3))
    plan, _ = rate_constrained_plan(p, q, cost, rate)
    np.testing.assert_allclose(plan.sum(axis=1), p, atol=1e-8)
    np.testing.assert_allclose(plan.sum(axis=0), q, atol=1e-8)
    ch = plan / plan.sum(axis=1, keepdims=True)
    assert mutual_info(p, ch) <= rate + 1e-6


@pytest.mark.parametrize(
    "seed, rate, oracle",
    [(90, 0.8, 0.52927796888223), (1790, 0.3, 0.18686589685637534), (22386, 0.5, 0.6423013952926895)],
)
def test_rate_constrained_plan_near_degenerate_transport(seed, rate, oracle):
    # near-tied transport optima: the budget only binds at beta in the thousands
    rng = np.random.default_rng(seed)
    p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
    cost = rng.random((3, 3))
    plan, _ = rate_constrained_plan(p, q, cost, rate)
    assert joint_mutual_info(plan) <= rate + 1e-9
    assert float((plan * cost).sum()) == pytest.approx(oracle, abs=1e-7)


def test_restoration_channel_exact_and_relaxed():
    a = np.array([0.7, 0.3])
    b = np.array([0.5, 0.5])
    cost = 1 - np.eye(2)
    ch = restoration_channel(a, b, cost)
    np.testing.assert_allclose(a @ ch.matrix, b, atol=1e-12)
    assert float((a[:, None] * ch.matrix * cost).sum()) == pytest.approx(0.2)
    relaxed = restoration_channel(a, b, cost, tv_budget=0.1)
    assert tv(a @ relaxed.matrix, b) <= 0.1 + 1e-12
    assert float((a[:, None] * relaxed.matrix * cost).sum()) == pytest.approx(0.1)


@pytest.mark.parametrize("p", [0.1, 0.25])
def test_nocr_matches_two_p_one_minus_p(p):
    pt = nocr_perfect_realism_D(uniform(2), HAM, 1 - binary_entropy(p))
    assert pt.D == pytest.approx(2 * p * (1 - p), abs=1e-4)
    enc, rest = pt.witness
    out = (np.array([0.5, 0.5]) @ enc.matrix) @ rest.matrix
    np.testing.assert_allclose(out, [0.5, 0.5], atol=1e-9)


def test_nocr_extremes():
    assert nocr_perfect_realism_D(uniform(2), HAM, 0.0).D == pytest.approx(0.5, abs=1e-9)
    assert nocr_perfect_realism_D(uniform(2), HAM, 1.0).D == pytest.approx(0.0, abs=1e-9)


def test_region_boundary_shapes():
    pts = region_boundary(uniform(2), HAM, TV, 1.0, bsc(0.1), num_points=3)
    assert [pt.P for pt in pts] == sorted(pt.P for pt in pts)
    for pt in pts:
        assert pt.D == pytest.approx(0.1, abs=1e-3)
    zero = region_boundary(uniform(2), HAM, TV, 0.0, bsc(0.1), num_points=2)
    assert zero[0].P == 0.0 and zero[0].D == pytest.approx(0.5, abs=1e-9)
    full = region_boundary(uniform(2), HAM, TV, 2.0, bsc(0.1), num_points=2)
    assert all(pt.D == pytest.approx(0.0, abs=1e-9) for pt in full)


def test_region_csv_round_trip():
    pts = region_boundary(bernoulli(0.3), HAM, TV, 0.5, bsc(0.1), num_points=3, cfg=SolverConfig())
    text = points_to_csv(pts)
    assert text.splitlines()[0] == "R,D,P"
    back = points_from_csv(text)
    assert back == [(pt.R, pt.D, pt.P) for pt in pts]
    assert '"witness"' in points_sidecar(pts)
