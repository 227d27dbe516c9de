import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from infodesign.expressions import Expression, ExpressionError
from infodesign.objectives import (
    CallableObjective,
    ExpressionObjective,
    LinearObjective,
    NonnegTail,
    QuadraticObjective,
    Sublevel,
    Unconstrained,
    constraint_from_dict,
    numerical_gradient,
    objective_from_dict,
)

vec = st.lists(st.floats(-3, 3), min_size=2, max_size=2).map(np.array)


class TestExpression:
    @pytest.mark.parametrize("src,v,want", [
        ("v1 + 2*v2", [1, 2], 5.0),
        ("v1 ^ 2 - v2", [3, 1], 8.0),
        ("v1 ** 2", [3, 0], 9.0),
        ("min(v1, v2) + max(v1, v2, 0)", [-1, 2], 1.0),
        ("abs(v1 - v2) / 2", [1, 4], 1.5),
        ("-(v1) + +v2", [1, 1], 0.0),
    ])
    def test_evaluates(self, src, v, want):
        assert Expression(src)(np.array(v, float)) == pytest.approx(want)

    @pytest.mark.parametrize("src", [
        "__import__('os')", "v1.real", "v0", "x + 1", "sin(v1)", "v1 if v2 else 0", "abs(v1, v2)",
        "min(v1)", "[v1]", "True", "v1 +",
    ])
    def test_rejects(self, src):
        with pytest.raises(ExpressionError):
            Expression(src, n_vars=2)

    def test_dimension_check(self):
        with pytest.raises(ExpressionError):
            Expression("v3", n_vars=2)


@given(vec)
def test_quadratic_gradient_matches_finite_differences(v):
    f = QuadraticObjective([[-2.0, 0.5], [0.1, -1.0]], [1.0, -1.0], 0.3)
    assert np.allclose(f.gradient(v), numerical_gradient(f, v), atol=1e-5)


@given(vec, vec, st.floats(0.1, 5.0))
def test_quadratic_line_max_beats_grid(v, d, tmax):
    f = QuadraticObjective([[-2.0, 0.0], [0.0, -1.0]], [1.0, 1.0])
    t = f.line_maximize(v, d, tmax)
    grid = np.linspace(0, tmax, 401)
    assert 0 <= t <= tmax
    assert f(v + t * d) >= max(f(v + s * d) for s in grid) - 1e-9


def test_generic_line_max_matches_closed_form():
    f = QuadraticObjective([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])
    g = CallableObjective(f)
    v, d = np.array([-1.0, 0.0]), np.array([1.0, 0.0])
    assert g.line_maximize(v, d, 3.0) == pytest.approx(f.line_maximize(v, d, 3.0), abs=1e-6)


def test_linear_objective():
    f = LinearObjective([1.0, -2.0], 0.5)
    assert f([1.0, 1.0]) == pytest.approx(-0.5)
    assert np.allclose(f.evaluate_many([[1, 1], [0, 0]]), [-0.5, 0.5])
    assert f.line_maximize(np.zeros(2), np.array([1.0, 0.0]), 2.0) == 2.0


def test_concavity_check():
    assert QuadraticObjective(-np.eye(2), np.zeros(2)).is_concave()
    assert not QuadraticObjective(np.eye(2), np.zeros(2)).is_concave()


@pytest.mark.parametrize("f", [
    LinearObjective([1.0, 2.0], 0.1),
    QuadraticObjective([[-1.0, 0.2], [0.2, -1.0]], [0.5, 0.0], 1.0),
    ExpressionObjective("min(v1, v2) - v1^2"),
])
def test_objective_roundtrip(f):
    g = objective_from_dict(f.to_dict(), 2)
    for v in np.random.default_rng(0).normal(size=(5, 2)):
        assert g(v) == pytest.approx(f(v))


def test_constraints():
    tail = NonnegTail(1)
    assert tail.satisfied([-5.0, 0.0]) and not tail.satisfied([0.0, -1.0])
    assert np.allclose(tail.jacobian([0, 0]), [[0, 1]])
    assert np.allclose(tail.values_many([[1, 2], [3, -4]]), [[2], [-4]])
    sub = Sublevel(LinearObjective([1.0, 1.0], -1.0))
    assert sub.satisfied([1.0, 0.5]) and not sub.satisfied([0.2, 0.2])
    assert Unconstrained().satisfied([1e9, -1e9])
    for c in (tail, sub, Unconstrained()):
        d = constraint_from_dict(c.to_dict(), 2)
        assert d.kind == c.kind
    with pytest.raises(ValueError):
        constraint_from_dict({"kind": "bogus"})
    with pytest.raises(ValueError):
        objective_from_dict({"kind": "bogus"})
