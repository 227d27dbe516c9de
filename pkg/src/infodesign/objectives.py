"""Objectives ``f`` and constraint sets ``D`` over value vectors."""

import numpy as np
from scipy.optimize import minimize_scalar

from .expressions import Expression


def numerical_gradient(fn, v, step=1e-6):
    v = np.asarray(v, dtype=float)
    grad = np.empty_like(v)
    for i in range(v.size):
        e = np.zeros_like(v)
        e[i] = step
        grad[i] = (fn(v + e) - fn(v - e)) / (2 * step)
    return grad


class Objective:
    """Real function of a value vector, with a gradient.

    Subclasses with closed-form derivatives set ``analytic_gradient``.
    """

    kind = None
    analytic_gradient = False

    def __call__(self, v):
        raise NotImplementedError

    def gradient(self, v):
        return numerical_gradient(self, v)

    def evaluate_many(self, V):
        """Values at each row of ``V``."""
        return np.array([self(v) for v in np.atleast_2d(V)])

    def line_maximize(self, v, d, tmax):
        """Step ``t`` in ``[0, tmax]`` maximizing ``f(v + t d)``, assuming concavity on the segment."""
        v, d = np.asarray(v, float), np.asarray(d, float)
        res = minimize_scalar(lambda t: -self(v + t * d), bounds=(0.0, tmax), method="bounded",
                              options={"xatol": 1e-13 * max(1.0, tmax)})
        cands = [0.0, tmax, float(res.x)]
        return max(cands, key=lambda t: self(v + t * d))

    def to_dict(self):
        raise NotImplementedError


class LinearObjective(Objective):
    kind = "linear"
    analytic_gradient = True

    def __init__(self, coef, const=0.0):
        self.coef = np.asarray(coef, dtype=float)
        self.const = float(const)

    def __call__(self, v):
        return float(self.coef @ np.asarray(v, float) + self.const)

    def gradient(self, v):
        return self.coef.copy()

    def evaluate_many(self, V):
        return np.atleast_2d(V) @ self.coef + self.const

    def line_maximize(self, v, d, tmax):
        return tmax if self.coef @ d > 0 else 0.0

    def to_dict(self):
        return {"kind": self.kind, "coef": self.coef.tolist(), "const": self.const}


class QuadraticObjective(Objective):
    """``f(v) = v @ A @ v + b @ v + c``."""

    kind = "quadratic"
    analytic_gradient = True

    def __init__(self, A, b, c=0.0):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        self.A = 0.5 * (A + A.T)
        self.b = np.asarray(b, dtype=float)
        self.c = float(c)

    def __call__(self, v):
        v = np.asarray(v, float)
        return float(v @ self.A @ v + self.b @ v + self.c)

    def gradient(self, v):
        return 2.0 * self.A @ np.asarray(v, float) + self.b

    def evaluate_many(self, V):
        V = np.atleast_2d(V)
        return np.einsum("pi,ij,pj->p", V, self.A, V) + V @ self.b + self.c

    def line_maximize(self, v, d, tmax):
        slope = self.gradient(v) @ d
        curv = d @ self.A @ d
        if curv < 0:
            return float(min(max(-slope / (2 * curv), 0.0), tmax))
        return tmax if slope + curv * tmax > 0 else 0.0

    def is_concave(self):
        return bool(np.all(np.linalg.eigvalsh(self.A) <= 1e-12))

    def to_dict(self):
        return {"kind": self.kind, "A": self.A.tolist(), "b": self.b.tolist(), "c": self.c}


class ExpressionObjective(Objective):
    kind = "custom-expression"

    def __init__(self, source, n_vars=None):
        self.expr = Expression(source, n_vars)

    def __call__(self, v):
        return float(self.expr(np.asarray(v, float)))

    def to_dict(self):
        return {"kind": self.kind, "expr": self.expr.source}


class CallableObjective(Objective):
    """Wrap a Python callable (library use only; not serializable)."""

    kind = "callable"

    def __init__(self, fn, grad=None):
        self.fn = fn
        self.grad = grad
        self.analytic_gradient = grad is not None

    def __call__(self, v):
        return float(self.fn(np.asarray(v, float)))

    def gradient(self, v):
        if self.grad is None:
            return numerical_gradient(self, v)
        return np.asarray(self.grad(np.asarray(v, float)), dtype=float)


def objective_from_dict(data, n_vars=None):
    kind = data["kind"]
    if kind == "linear":
        return LinearObjective(data["coef"], data.get("const", 0.0))
    if kind == "quadratic":
        return QuadraticObjective(data["A"], data["b"], data.get("c", 0.0))
    if kind == "custom-expression":
        return ExpressionObjective(data["expr"], n_vars)
    raise ValueError(f"unknown objective kind {kind!r}")


# ---------------------------------------------------------------- constraints


class Constraint:
    """A set ``D`` written as ``{v : g_j(v) >= 0 for all j}``."""

    kind = None

    def values(self, v):
        """Constraint function values ``g_j(v)`` (empty when unconstrained)."""
        return np.empty(0)

    def jacobian(self, v):
        return np.empty((0, np.asarray(v).size))

    def values_many(self, V):
        """Constraint values for each row of ``V``, shape ``(rows, n_constraints)``."""
        V = np.atleast_2d(V)
        return np.array([self.values(v) for v in V]).reshape(V.shape[0], -1)

    def satisfied(self, v, tol=1e-6):
        vals = self.values(v)
        return bool(vals.size == 0 or vals.min() >= -tol)

    def to_dict(self):
        return {"kind": self.kind}


class Unconstrained(Constraint):
    kind = "none"


class NonnegTail(Constraint):
    """The last ``m`` coordinates must be nonnegative."""

    kind = "nonneg-tail"

    def __init__(self, m):
        self.m = int(m)

    def values(self, v):
        v = np.asarray(v, float)
        return v[v.size - self.m:] if self.m else np.empty(0)

    def values_many(self, V):
        V = np.atleast_2d(V)
        return V[:, V.shape[1] - self.m:]

    def jacobian(self, v):
        n = np.asarray(v).size
        return np.eye(n)[n - self.m:]

    def to_dict(self):
        return {"kind": self.kind, "m": self.m}


class Sublevel(Constraint):
    """``g(v) >= 0`` for a scalar objective-like ``g``."""

    kind = "sublevel"

    def __init__(self, g):
        self.g = g

    def values(self, v):
        return np.array([self.g(v)])

    def values_many(self, V):
        return self.g.evaluate_many(V)[:, None]

    def jacobian(self, v):
        return self.g.gradient(v)[None, :]

    def to_dict(self):
        return {"kind": self.kind, "g": self.g.to_dict()}


class ExplicitSet(Constraint):
    """Membership given by a predicate; reported as ``0`` (in) or ``-1`` (out)."""

    kind = "explicit-set"

    def __init__(self, predicate):
        self.predicate = predicate

    def values(self, v):
        return np.array([0.0 if self.predicate(np.asarray(v, float)) else -1.0])

    def jacobian(self, v):
        raise NotImplementedError("explicit sets carry no derivative information")


def constraint_from_dict(data, n_vars=None):
    kind = data["kind"]
    if kind == "none":
        return Unconstrained()
    if kind == "nonneg-tail":
        return NonnegTail(data["m"])
    if kind == "sublevel":
        return Sublevel(objective_from_dict(data["g"], n_vars))
    raise ValueError(f"unknown constraint kind {kind!r}")
