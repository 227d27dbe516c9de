import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import concave_design_slsqp, linear_design_lp, random_concave_quadratic

from infodesign.concavify import concavify
from infodesign.core import DecisionUtility, Entropy, Indicator, LinearCombination
from infodesign.exceptions import InfeasibleProblem, MaxIterations
from infodesign.objectives import (
    CallableObjective,
    ExpressionObjective,
    LinearObjective,
    NonnegTail,
    QuadraticObjective,
    Sublevel,
)
from infodesign.solver import (
    ProblemSpec,
    Solution,
    recover_multipliers,
    resolve_method,
    solve,
    solve_convex_constrained,
    solve_generic,
    solve_smooth,
    solve_with_slack,
    value_profile,
)

MU = np.array([0.7, 0.3])
VA = [Indicator(0.6), Entropy()]


def check_solution(sol, spec):
    n, k = spec.n, spec.mu.size
    P = sol.structure
    assert P.support_size <= (n + 1) * k
    assert np.allclose(P.barycenter(), spec.mu, atol=1e-9)
    assert np.allclose([P.expectation(v) for v in spec.vfuncs], sol.v_star, atol=1e-9)
    assert sol.value == pytest.approx(spec.objective(sol.v_star), abs=1e-9)
    assert spec.constraint.satisfied(sol.v_star, tol=1e-6)


class TestSpec:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            ProblemSpec(MU, VA, LinearObjective([1.0]))

    def test_wrong_gradient_rejected(self):
        bad = CallableObjective(lambda v: v @ v, grad=lambda v: v)
        with pytest.raises(ValueError):
            ProblemSpec(MU, VA, bad)

    def test_roundtrip(self):
        spec = ProblemSpec(MU, VA, QuadraticObjective(-np.eye(2), [1, 1]), NonnegTail(1))
        again = ProblemSpec.from_dict(spec.to_dict())
        assert again.objective([0.3, 0.2]) == pytest.approx(spec.objective([0.3, 0.2]))
        assert again.constraint.kind == "nonneg-tail"

    def test_auto_dispatch(self):
        assert resolve_method(ProblemSpec(MU, VA, LinearObjective([1, 1]))) == "smooth"
        assert resolve_method(ProblemSpec(MU, VA, ExpressionObjective("min(v1, v2)"))) == "generic"
        assert resolve_method(ProblemSpec(MU, VA, LinearObjective([1, 0]), NonnegTail(1))) == "slack"
        g = Sublevel(LinearObjective([0, 1], -0.4))
        assert resolve_method(ProblemSpec(MU, VA, LinearObjective([1, 0]), g)) == "convex"


def test_single_function_is_concavification():
    spec = ProblemSpec(MU, [Indicator(0.6)], LinearObjective([1.0]))
    sol = solve_generic(spec)
    assert sol.value == pytest.approx(0.5, abs=1e-12)
    check_solution(sol, spec)


def test_linear_objective_linear_constraint_matches_lp():
    g = Sublevel(LinearObjective([0.0, 1.0], -0.4))
    spec = ProblemSpec(MU, VA, LinearObjective([1.0, 0.0]), g)
    sol = solve_generic(spec)
    assert sol.value == pytest.approx(linear_design_lp(MU, VA, [1, 0], G=[0, 1], h=0.4), abs=1e-8)
    check_solution(sol, spec)


def test_nonsmooth_objective(instance_a):
    mu, vfs = instance_a
    spec = ProblemSpec(mu, vfs, ExpressionObjective("min(v1, 2*v2)", 2))
    sol = solve_generic(spec)
    check_solution(sol, spec)
    # min(v1, 2 v2) <= v1 <= cav 1{p >= 0.6} = 0.5, and the split attains it
    assert sol.value == pytest.approx(0.5, abs=1e-9)


@settings(max_examples=8)
@given(st.integers(0, 2**31))
def test_smooth_matches_weight_space_oracle(seed):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.1, 0.9)
    mu = np.array([1 - p, p])
    B = rng.normal(size=(2, 2))
    A = -(B @ B.T + 0.1 * np.eye(2))
    c = rng.uniform(0, 0.7, 2)
    f = QuadraticObjective(A, -2 * A @ c, c @ A @ c)
    spec = ProblemSpec(mu, VA, f)
    sol = solve_smooth(spec)
    assert sol.diagnostics["fw_gap"] <= 1e-7
    assert sol.value == pytest.approx(concave_design_slsqp(mu, VA, f), abs=1e-6)
    check_solution(sol, spec)
    lam = sol.multipliers["lambda"]
    if not np.any(lam):
        assert np.linalg.norm(f.gradient(sol.v_star)) <= 1e-6
        return
    assert np.isclose(np.linalg.norm(lam), 1.0)
    # the optimum maximizes lam . v over the set: lam . v* equals the support value
    h = concavify(LinearCombination(lam, VA), mu).value
    assert lam @ sol.v_star == pytest.approx(h, abs=1e-6)


def test_smooth_linear_equals_envelope():
    sol = solve_smooth(ProblemSpec(MU, VA, LinearObjective([1.0, 1.0])))
    assert sol.value == pytest.approx(concavify(LinearCombination([1, 1], VA), MU).value, abs=1e-12)


def test_smooth_step_rules_agree():
    f = QuadraticObjective([[-1.0, 0.0], [0.0, -2.0]], [1.0, 1.2], -0.18)
    spec = ProblemSpec(MU, VA, f)
    a = solve_smooth(spec)
    b = solve_smooth(spec, step="harmonic", tol=1e-4, max_iter=3000)
    assert b.value == pytest.approx(a.value, abs=1e-3)


def test_smooth_iteration_cap_reports_best():
    f = QuadraticObjective([[-1.0, 0.9], [0.9, -1.0]], [0.3, 0.1])
    with pytest.raises(MaxIterations) as info:
        solve_smooth(ProblemSpec(MU, VA, f), max_iter=1, corrective=False, tol=1e-15)
    assert isinstance(info.value.best, Solution)


@pytest.mark.parametrize("seed", range(4))
def test_convex_constrained_kkt(seed):
    rng = np.random.default_rng(100 + seed)
    p = rng.uniform(0.15, 0.85)
    mu = np.array([1 - p, p])
    B = rng.normal(size=(2, 2))
    A = -(B @ B.T + 0.1 * np.eye(2))
    c = rng.uniform(0, 0.7, 2)
    f = QuadraticObjective(A, -2 * A @ c, c @ A @ c)
    a = rng.normal(size=2)
    a /= np.linalg.norm(a)
    nip = np.array([v(mu) for v in VA])
    if a @ c > a @ nip:
        g = LinearObjective(-a, a @ nip + rng.uniform(0.2, 0.8) * (a @ c - a @ nip))
    else:
        g = LinearObjective(a, -(a @ nip - 0.05))
    spec = ProblemSpec(mu, VA, f, Sublevel(g))
    sol = solve_convex_constrained(spec)
    check_solution(sol, spec)
    m = sol.multipliers
    eta, gam = float(m["eta"][0]), float(m["gamma"][0])
    assert eta >= 0 and gam >= 0
    resid = m["lambda"] - eta * f.gradient(sol.v_star) - gam * g.gradient(sol.v_star)
    assert np.linalg.norm(resid) <= 1e-5
    assert abs(gam * g(sol.v_star)) <= 1e-5
    assert sol.value == pytest.approx(concave_design_slsqp(mu, VA, f, g), abs=1e-5)


def test_slack_solver_matches_lp():
    # maximize v1 subject to H - 0.4 >= 0, written as a nonnegative tail coordinate
    tail = LinearCombination([1.0], [Entropy()], offset=-0.4)
    spec = ProblemSpec(MU, [Indicator(0.6), tail], LinearObjective([1.0, 0.0]), NonnegTail(1))
    sol = solve_with_slack(spec)
    check_solution(sol, spec)
    assert sol.value == pytest.approx(linear_design_lp(MU, VA, [1, 0], G=[0, 1], h=0.4), abs=1e-8)
    assert sol.diagnostics["binding"] == [1]
    m = sol.multipliers
    assert np.all(np.asarray(m["eta"]) >= 0) and np.all(np.asarray(m["gamma"]) >= -1e-12)
    assert abs(sol.diagnostics["stationarity"]) <= 1e-5


def test_recover_multipliers_linear():
    f = LinearObjective([2.0, 1.0])
    spec = ProblemSpec(MU, VA, f)
    sol = solve_generic(spec)
    w, lam, phi = recover_multipliers(spec, sol.v_star, [f.coef])
    assert np.allclose(w, [1.0]) and np.allclose(lam, f.coef, atol=1e-8)
    assert phi == pytest.approx(0.0, abs=1e-8)


def test_infeasible_constraint():
    g = Sublevel(LinearObjective([1.0, 0.0], -2.0))
    with pytest.raises(InfeasibleProblem):
        solve_generic(ProblemSpec(MU, VA, LinearObjective([1.0, 0.0]), g))


def test_solution_roundtrip():
    sol = solve(ProblemSpec(MU, VA, LinearObjective([1.0, 1.0])))
    again = Solution.from_dict(sol.to_dict())
    assert again.value == sol.value and np.allclose(again.v_star, sol.v_star)
    assert again.structure.support_size == sol.structure.support_size


def test_value_profile_flags_infeasible_priors():
    g = Sublevel(LinearObjective([0.0, 1.0], -0.5))
    spec = ProblemSpec(MU, VA, LinearObjective([1.0, 0.0]), g)
    rows = value_profile(spec, [[0.95, 0.05], [0.5, 0.5]])
    assert rows[0][1] is None and "InfeasibleProblem" in rows[0][2]
    assert rows[1][1] is not None


def test_three_states_generic_matches_lp():
    rng = np.random.default_rng(7)
    mu = np.array([0.2, 0.5, 0.3])
    vfs = [DecisionUtility(rng.uniform(size=(3, 3))), Entropy()]
    g = Sublevel(LinearObjective([0.0, 1.0], -0.6))
    spec = ProblemSpec(mu, vfs, LinearObjective([1.0, 0.0]), g)
    sol = solve_generic(spec, resolution=10)
    check_solution(sol, spec)
    assert sol.value == pytest.approx(linear_design_lp(mu, vfs, [1, 0], G=[0, 1], h=0.6, resolution=10), abs=1e-6)
