"""Scikit-learn style wrappers around the solvers.

Each estimator takes its problem data as constructor parameters, so
``get_params`` / ``set_params`` / ``clone`` behave as usual.  ``fit`` does
the expensive work once; ``predict`` evaluates at new priors or points.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_belief, check_beliefs
from .concavify import DEFAULT_RESOLUTION, concavify
from .dynamic import DynamicSpec, value_iterate
from .objectives import Unconstrained
from .posset import BOUNDARY_TOL, approximate_set, membership
from .solver import ProblemSpec, resolve_method, solve, value_profile


def _rows(X):
    """Beliefs from ``X``; a 1-d array or a single column lists values of ``Pr(x1)``."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[1] == 1:
        X = np.hstack([1.0 - X, X])
    return check_beliefs(X)


class ConcaveEnvelope(BaseEstimator):
    """Concave envelope of one value function.

    ``fit`` records the state count; ``predict`` returns ``cav V`` at each
    row of ``X`` and keeps the optimal structures in ``structures_``.

    Parameters
    ----------
    value_function : ValueFunction
    resolution : int
    include_critical : bool
        Add the function's own kink points to the posterior candidates.
    """

    def __init__(self, value_function=None, resolution=DEFAULT_RESOLUTION, include_critical=True):
        self.value_function = value_function
        self.resolution = resolution
        self.include_critical = include_critical

    def fit(self, X, y=None):
        if self.value_function is None:
            raise ValueError("value_function is required")
        B = _rows(X)
        self.n_states_ = B.shape[1]
        self.results_ = [self._one(mu) for mu in B]
        return self

    def _one(self, mu):
        return concavify(self.value_function, mu, self.resolution, include_critical=self.include_critical)

    def predict(self, X):
        check_is_fitted(self, "n_states_")
        B = _rows(X)
        if B.shape[1] != self.n_states_:
            raise ValueError(f"expected beliefs over {self.n_states_} states")
        res = [self._one(mu) for mu in B]
        self.structures_ = [r.structure for r in res]
        return np.array([r.value for r in res])

    def gain(self, X):
        """Value of persuasion ``cav V(mu) - V(mu)``."""
        B = _rows(X)
        return self.predict(B) - self.value_function(B)

    def transform(self, X):
        """The gain as a single feature column."""
        return self.gain(X)[:, None]


class PossibilitySet(BaseEstimator):
    """Sandwich approximation of the achievable expected-value set at ``mu``.

    ``fit(mu)`` samples support points; ``predict(V)`` returns 1 for rows
    inside (up to ``tol``) and 0 otherwise.
    """

    def __init__(self, vfuncs=None, directions=None, resolution=DEFAULT_RESOLUTION, tol=BOUNDARY_TOL):
        self.vfuncs = vfuncs
        self.directions = directions
        self.resolution = resolution
        self.tol = tol

    def fit(self, X, y=None):
        if not self.vfuncs:
            raise ValueError("vfuncs is required")
        mu = check_belief(np.ravel(np.asarray(X, dtype=float)))
        self.approx_ = approximate_set(mu, self.vfuncs, self.directions, self.resolution)
        self.sandwich_gap_ = self.approx_.sandwich_gap()
        return self

    def predict(self, X):
        check_is_fitted(self, "approx_")
        V = np.atleast_2d(np.asarray(X, dtype=float))
        if V.shape[1] != len(self.vfuncs):
            raise ValueError(f"points must have {len(self.vfuncs)} coordinates")
        return np.array([int(membership(v, self.approx_, tol=self.tol) != "outside") for v in V])

    def transform(self, X):
        """Largest outer-halfspace violation per row; positive means outside the outer polytope."""
        check_is_fitted(self, "approx_")
        V = np.atleast_2d(np.asarray(X, dtype=float))
        if V.shape[1] != len(self.vfuncs):
            raise ValueError(f"points must have {len(self.vfuncs)} coordinates")
        return np.array([[self.approx_.halfspace_violation(v)] for v in V])

    def support(self, directions):
        """Outer support values ``max_v lambda . v`` over the inner polytope."""
        check_is_fitted(self, "approx_")
        D = np.atleast_2d(np.asarray(directions, dtype=float))
        return np.max(D @ self.approx_.inner_vertices.T, axis=1)


class InformationDesignSolver(BaseEstimator):
    """Optimal structure for ``max f(E_P V)`` subject to ``E_P V in D``.

    ``fit(mu)`` solves at one prior and sets ``solution_``; ``predict`` maps
    priors to optimal values (``nan`` where a prior is infeasible).
    """

    def __init__(self, vfuncs=None, objective=None, constraint=None, method="auto",
                 directions=None, resolution=DEFAULT_RESOLUTION):
        self.vfuncs = vfuncs
        self.objective = objective
        self.constraint = constraint
        self.method = method
        self.directions = directions
        self.resolution = resolution

    def _spec(self, mu):
        if not self.vfuncs or self.objective is None:
            raise ValueError("vfuncs and objective are required")
        constraint = Unconstrained() if self.constraint is None else self.constraint
        return ProblemSpec(mu, self.vfuncs, self.objective, constraint)

    def fit(self, X, y=None):
        mu = check_belief(np.ravel(np.asarray(X, dtype=float)))
        self.spec_ = self._spec(mu)
        method = resolve_method(self.spec_, self.method)
        kwargs = {"resolution": self.resolution}
        if method != "smooth":
            kwargs["directions"] = self.directions
        self.solution_ = solve(self.spec_, method, **kwargs)
        self.value_ = self.solution_.value
        self.structure_ = self.solution_.structure
        return self

    def predict(self, X):
        check_is_fitted(self, "spec_")
        rows = value_profile(self.spec_, _rows(X), self.directions, self.resolution)
        return np.array([np.nan if v is None else v for _, v, _ in rows])


class DynamicValueIteration(BaseEstimator):
    """Fixed point of the stop-or-learn Bellman operator by value iteration.

    ``fit`` ignores ``X``; ``predict`` evaluates the fitted table at beliefs
    by piecewise-linear interpolation.
    """

    def __init__(self, F=None, cost=None, discount=0.9, capacity=np.inf, resolution=DEFAULT_RESOLUTION,
                 n_states=2, tol=None, max_iter=10000, start="F"):
        self.F = F
        self.cost = cost
        self.discount = discount
        self.capacity = capacity
        self.resolution = resolution
        self.n_states = n_states
        self.tol = tol
        self.max_iter = max_iter
        self.start = start

    def fit(self, X=None, y=None):
        if self.F is None or self.cost is None:
            raise ValueError("F and cost are required")
        self.spec_ = DynamicSpec(self.F, self.cost, self.discount, self.capacity, self.resolution, self.n_states)
        self.table_ = value_iterate(self.spec_, self.tol, self.max_iter, self.start)
        self.n_iter_ = self.table_.diagnostics["iterations"]
        return self

    def predict(self, X):
        check_is_fitted(self, "table_")
        B = _rows(X) if self.n_states == 2 else check_beliefs(X)
        return self.table_(B)
