import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from oracles import binary_cav_bruteforce, random_pwl

from infodesign.concavify import (
    candidate_posteriors,
    caratheodory_reduce,
    concavify,
    concavify_grid,
    reduce_structure,
)
from infodesign.core import DecisionUtility, Entropy, Indicator, LinearCombination, PiecewiseLinear, SignalStructure
from infodesign.exceptions import NumericalRankFailure


@given(st.integers(0, 2**31), st.floats(0.01, 0.99))
def test_binary_pwl_matches_pair_search(seed, p):
    rng = np.random.default_rng(seed)
    f = random_pwl(rng)
    res = concavify(f, [1 - p, p], resolution=12)
    assert res.value == pytest.approx(binary_cav_bruteforce(f, p, np.arange(13) / 12), abs=1e-9)


@given(st.integers(0, 2**31), st.floats(0.01, 0.99))
def test_off_grid_kinks_are_exact(seed, p):
    # breakpoints off the coarse grid enter as candidates, so the LP is exact;
    # a pwl envelope is attained on its breakpoints, hence the pair search
    rng = np.random.default_rng(seed)
    bps = np.concatenate([[0.0], np.sort(rng.uniform(0.02, 0.98, 4)), [1.0]])
    f = PiecewiseLinear(bps, rng.uniform(-1, 1, bps.size))
    res = concavify(f, [1 - p, p], resolution=3)
    assert res.value == pytest.approx(binary_cav_bruteforce(f, p, bps), abs=1e-9)


def test_convex_decision_utility_envelope_is_chord():
    F = DecisionUtility([[1.0, 0.0], [0.0, 1.0], [0.7, 0.6]])
    for p in (0.2, 0.5, 0.8):
        assert concavify(F, [1 - p, p], resolution=5).value == pytest.approx((1 - p) * 1.0 + p * 1.0)


@pytest.mark.parametrize("seed", range(5))
def test_three_states_matches_highs(seed):
    rng = np.random.default_rng(seed)
    F = DecisionUtility(rng.uniform(size=(4, 3)))
    g = LinearCombination([1.0, -0.3], [F, Entropy()])
    mu = rng.dirichlet(np.ones(3))
    res = concavify(g, mu, resolution=10)
    pts = candidate_posteriors(g, mu, 10)
    ref = linprog(-g(pts), A_eq=pts.T, b_eq=mu, bounds=(0, None), method="highs")
    assert res.value == pytest.approx(-ref.fun, abs=1e-9)
    assert res.structure.support_size <= 3
    assert np.allclose(res.structure.barycenter(), mu, atol=1e-12)


def test_concave_function_is_its_own_envelope():
    for p in (0.1, 0.37, 0.5):
        assert concavify(Entropy(), [1 - p, p]).value == pytest.approx(Entropy()([1 - p, p]), abs=1e-12)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_split_formula(mu, star):
    if mu >= star - 1e-6:
        return
    res = concavify(Indicator(star), [1 - mu, mu])
    P = res.structure
    assert res.value == pytest.approx(mu / star, abs=1e-9)
    hi = np.argmax(P.posteriors[:, 1])
    assert P.posteriors[hi, 1] == pytest.approx(star, abs=1e-12)
    assert P.weights[hi] == pytest.approx(mu / star, abs=1e-9)
    assert P.posteriors[1 - hi, 1] == pytest.approx(0.0, abs=1e-12)


def test_envelope_table_is_concave_majorant(rng):
    f = random_pwl(rng)
    vals = concavify_grid(f, 2, 24)
    g = np.arange(25) / 24
    raw = f(np.column_stack([1 - g, g]))
    assert np.all(vals >= raw - 1e-12)
    assert np.all(np.diff(vals, 2) <= 1e-10)


@given(st.integers(0, 2**31), st.integers(1, 4), st.integers(2, 12))
def test_caratheodory_bound_and_barycenter(seed, m, k):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(k, m))
    w = rng.dirichlet(np.ones(k))
    w2, P2 = caratheodory_reduce(w, P)
    assert len(w2) <= m + 1
    assert np.all(w2 >= 0) and np.isclose(w2.sum(), 1.0)
    assert np.allclose(w2 @ P2, w @ P, atol=1e-9)


def test_caratheodory_rejects_bad_input():
    with pytest.raises(ValueError):
        caratheodory_reduce([0.5, 0.6], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        caratheodory_reduce([0.5, 0.5], [[0.0], [1.0]], target=[0.9])


def test_caratheodory_tolerance_failure():
    w = np.full(4, 0.25)
    P = np.array([[0.0], [1.0], [2.0], [3.0]])
    with pytest.raises(NumericalRankFailure):
        caratheodory_reduce(w, P, tol=-1.0)


@given(st.integers(0, 2**31))
def test_reduce_structure_keeps_expectations(seed):
    rng = np.random.default_rng(seed)
    vfs = [DecisionUtility(rng.uniform(size=(3, 3))), Entropy()]
    P = SignalStructure(rng.dirichlet(np.ones(9)), rng.dirichlet(np.ones(3), size=9))
    Q = reduce_structure(P, vfs)
    assert Q.support_size <= 3 + len(vfs)
    assert np.allclose(Q.barycenter(), P.barycenter(), atol=1e-9)
    for v in vfs:
        assert Q.expectation(v) == pytest.approx(P.expectation(v), abs=1e-9)
