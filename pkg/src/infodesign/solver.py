"""Optimal signal structures for objectives of expected values.

The program is

    max f(E_P[V^1], ..., E_P[V^n])  s.t.  (E_P[V^i])_i in D,  E_P[nu] = mu,

which reduces to maximizing ``f`` over ``D`` intersected with the
possibility set.  Four routes are offered:

* :func:`solve_generic` searches the inner polytope of a refined set
  approximation (any ``f``, any ``D``);
* :func:`solve_smooth` runs Frank-Wolfe with the support function as the
  linear oracle, so its stopping gap certifies the first-order condition;
* :func:`solve_with_slack` handles nonnegativity constraints on extra
  coordinates and returns a scalarizing direction;
* :func:`solve_convex_constrained` handles one smooth constraint and
  recovers the multipliers ``(eta, gamma)`` of the dual characterization.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog, minimize
from scipy.spatial import ConvexHull, QhullError

from ._parallel import pmap
from ._validation import check_belief
from .concavify import DEFAULT_RESOLUTION, reduce_structure
from .core import SignalStructure, ValueFunction, expected_values, mix_many, value_function_from_dict
from .exceptions import InfeasibleProblem, InfoDesignError, MaxIterations, NonConvergence
from .geometry import affine_basis
from .objectives import (
    ExplicitSet,
    NonnegTail,
    Objective,
    Sublevel,
    Unconstrained,
    constraint_from_dict,
    numerical_gradient,
    objective_from_dict,
)
from .posset import approximate_set, implement_point, support_point

#: Constraint feasibility tolerance used throughout.
FEAS_TOL = 1e-6
FW_TOL = 1e-7
#: Gradients shorter than this mark an interior maximum of ``f``.
GRAD_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Prior, value functions, objective ``f`` and constraint set ``D``."""

    mu: np.ndarray
    vfuncs: list
    objective: Objective
    constraint: object = field(default_factory=Unconstrained)
    f_quasiconcave: bool = False
    g_quasiconcave: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu", check_belief(self.mu))
        object.__setattr__(self, "vfuncs", list(self.vfuncs))
        if not self.vfuncs or not all(isinstance(v, ValueFunction) for v in self.vfuncs):
            raise ValueError("vfuncs must be a non-empty list of ValueFunction")
        n = len(self.vfuncs)
        if getattr(self.objective, "coef", None) is not None and self.objective.coef.size != n:
            raise ValueError(f"linear objective has {self.objective.coef.size} coefficients, expected {n}")
        if getattr(self.objective, "A", None) is not None and self.objective.A.shape != (n, n):
            raise ValueError(f"quadratic objective must be {n}x{n}")
        if isinstance(self.constraint, NonnegTail) and not 0 <= self.constraint.m <= n:
            raise ValueError("nonneg-tail length exceeds the number of value functions")
        _check_gradient(self.objective, n, "objective")
        if isinstance(self.constraint, Sublevel):
            _check_gradient(self.constraint.g, n, "constraint")

    @property
    def n(self):
        return len(self.vfuncs)

    def with_prior(self, mu):
        return replace(self, mu=mu)

    def no_info_point(self):
        return np.array([v(self.mu) for v in self.vfuncs])

    def to_dict(self):
        return {
            "spec_version": 1,
            "mu": self.mu.tolist(),
            "vfuncs": [v.to_dict() for v in self.vfuncs],
            "objective": self.objective.to_dict(),
            "constraint": self.constraint.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        vfuncs = [value_function_from_dict(v) for v in data["vfuncs"]]
        n = len(vfuncs)
        return cls(
            data["mu"],
            vfuncs,
            objective_from_dict(data["objective"], n),
            constraint_from_dict(data.get("constraint", {"kind": "none"}), n),
        )


def _check_gradient(fn, n, name, points=5):
    if not fn.analytic_gradient:
        return
    rng = np.random.default_rng(0)
    for v in rng.uniform(-1.0, 1.0, size=(points, n)):
        ga, gn = fn.gradient(v), numerical_gradient(fn, v)
        if np.max(np.abs(ga - gn)) > 1e-4 * max(1.0, float(np.max(np.abs(gn)))):
            raise ValueError(f"{name} gradient disagrees with finite differences at {v}")


@dataclass(frozen=True, eq=False)
class Solution:
    """Optimal value, expected-value vector, structure, and certificates."""

    value: float
    v_star: np.ndarray
    structure: SignalStructure
    multipliers: dict = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        mult = None
        if self.multipliers is not None:
            mult = {k: np.asarray(val, dtype=float).tolist() for k, val in self.multipliers.items()}
        return {
            "spec_version": 1,
            "value": float(self.value),
            "v_star": np.asarray(self.v_star, dtype=float).tolist(),
            "structure": self.structure.to_dict(),
            "multipliers": mult,
            "diagnostics": _jsonable(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data):
        mult = data.get("multipliers")
        if mult is not None:
            mult = {k: np.asarray(v, dtype=float) for k, v in mult.items()}
        return cls(
            float(data["value"]),
            np.asarray(data["v_star"], dtype=float),
            SignalStructure.from_dict(data["structure"]),
            mult,
            dict(data.get("diagnostics", {})),
        )


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _prune(structure, mu, tol=1e-10):
    """Drop atoms of weight below ``tol`` when that keeps the barycenter within ``tol`` of ``mu``."""
    keep = structure.weights > tol
    if keep.all():
        return structure
    w = structure.weights[keep]
    pruned = SignalStructure(w / w.sum(), structure.posteriors[keep])
    return pruned if np.max(np.abs(pruned.barycenter() - mu)) <= tol else structure


def _finish(spec, value, v_star, structure, multipliers=None, **diagnostics):
    structure = _prune(reduce_structure(structure, spec.vfuncs), spec.mu)
    realized = expected_values(structure, spec.vfuncs)
    diagnostics["expected_value_residual"] = float(np.max(np.abs(realized - v_star)))
    diagnostics["bayes_residual"] = float(np.max(np.abs(structure.barycenter() - spec.mu)))
    diagnostics["support_size"] = structure.support_size
    return Solution(float(value), np.asarray(v_star, dtype=float), structure, multipliers, diagnostics)


# ---------------------------------------------------------------- polytope search


class _Polytope:
    """Inner polytope in affine-hull coordinates ``v = origin + y @ basis``."""

    def __init__(self, vertices):
        self.vertices = np.atleast_2d(vertices)
        self.origin, self.basis = affine_basis(self.vertices)
        self.k = self.basis.shape[0]
        self.Y = (self.vertices - self.origin) @ self.basis.T
        self.hull = None
        if self.k == 1:
            lo, hi = self.Y[:, 0].min(), self.Y[:, 0].max()
            self.eq = np.array([[-1.0, lo], [1.0, -hi]])
        elif self.k >= 2:
            try:
                self.hull = ConvexHull(self.Y)
            except QhullError:
                self.hull = ConvexHull(self.Y, qhull_options="QJ")
            self.eq = self.hull.equations
        else:
            self.eq = np.zeros((0, 1))

    def lift(self, Y):
        return self.origin + np.atleast_2d(Y) @ self.basis

    def violation(self, y):
        if self.k == 0:
            return 0.0
        return float(np.max(self.eq[:, :-1] @ y + self.eq[:, -1]))

    def candidates(self):
        if self.k == 0:
            return np.zeros((1, 0))
        if self.k == 1:
            lo, hi = self.eq[0, 1], -self.eq[1, 1]
            return np.linspace(lo, hi, 2001)[:, None]
        per = {2: 50, 3: 20}.get(self.k, 10)
        lo, hi = self.Y.min(axis=0), self.Y.max(axis=0)
        axes = [np.linspace(lo[i], hi[i], per) for i in range(self.k)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.k)
        grid = grid[np.max(grid @ self.eq[:, :-1].T + self.eq[:, -1], axis=1) <= 1e-12]
        edges = set()
        for simplex in self.hull.simplices:
            for a in simplex:
                for b in simplex:
                    if a < b:
                        edges.add((a, b))
        t = np.linspace(0.0, 1.0, 41)[:, None]
        edge_pts = [(1 - t) * self.Y[a] + t * self.Y[b] for a, b in sorted(edges)]
        return np.vstack([self.Y[self.hull.vertices], grid] + edge_pts)

    def facets_through(self, v, tol=1e-9):
        """Outward unit normals (original coordinates) of facets containing ``v``."""
        if self.k == 0:
            return np.zeros((0, self.vertices.shape[1]))
        y = (np.asarray(v) - self.origin) @ self.basis.T
        slack = self.eq[:, :-1] @ y + self.eq[:, -1]
        normals = self.eq[np.abs(slack) <= tol, :-1] @ self.basis
        norms = np.linalg.norm(normals, axis=1, keepdims=True)
        return normals / np.where(norms > 0, norms, 1.0)


def _maximize_over_polytope(spec, poly, tol=FEAS_TOL):
    """Best ``(v, f(v))`` over the polytope intersected with ``D``; ``None`` if none feasible."""
    f, con = spec.objective, spec.constraint
    Y = poly.candidates()
    V = poly.lift(Y)
    vals = f.evaluate_many(V)
    cvals = con.values_many(V)
    feas = np.ones(len(V), dtype=bool) if cvals.shape[1] == 0 else cvals.min(axis=1) >= -1e-12
    if not feas.any():
        loose = cvals.min(axis=1) >= -tol
        if not loose.any():
            return None
        feas = loose
    order = np.flatnonzero(feas)[np.argsort(-vals[feas], kind="stable")]
    best_y, best_val = Y[order[0]], vals[order[0]]
    if poly.k == 0:
        return V[order[0]], float(best_val)

    starts = [Y[order[0]]]
    for i in order[1:]:
        if len(starts) == 3:
            break
        if all(np.max(np.abs(Y[i] - s)) > 1e-3 for s in starts):
            starts.append(Y[i])
    for y0 in starts:
        y, val = _polish(spec, poly, y0)
        if y is not None and val > best_val:
            best_y, best_val = y, val
    return poly.lift(best_y)[0], float(best_val)


def _polish(spec, poly, y0):
    f, con = spec.objective, spec.constraint
    B, o = poly.basis, poly.origin
    A_h, b_h = poly.eq[:, :-1], poly.eq[:, -1]

    def fun(y):
        return -f(o + y @ B)

    def jac(y):
        return -(B @ f.gradient(o + y @ B))

    cons = [{"type": "ineq", "fun": lambda y: -(A_h @ y + b_h), "jac": lambda y: -A_h}]
    if isinstance(con, ExplicitSet):
        return None, None
    if not isinstance(con, Unconstrained):
        cons.append({"type": "ineq", "fun": lambda y: con.values(o + y @ B),
                     "jac": lambda y: con.jacobian(o + y @ B) @ B.T})
    try:
        res = minimize(fun, y0, jac=jac, method="SLSQP", constraints=cons,
                       options={"ftol": 1e-14, "maxiter": 300})
    except (ValueError, np.linalg.LinAlgError):
        return None, None
    y = res.x
    scale = max(1.0, float(np.abs(b_h).max()))
    if poly.violation(y) > 1e-11 * scale:
        return None, None
    cv = con.values(o + y @ B)
    if cv.size and cv.min() < -1e-10:
        return None, None
    return y, -fun(y)


def _refinement_directions(spec, poly, v):
    dirs = list(poly.facets_through(v))
    if dirs and not isinstance(spec.constraint, ExplicitSet):
        g = spec.objective.gradient(v)
        if np.linalg.norm(g) > 1e-12:
            dirs.append(g / np.linalg.norm(g))
    return dirs


def _refine(spec, approx, v, resolution):
    """Add support points in directions that expose gaps near ``v``; return ``(approx, added)``."""
    poly = _Polytope(approx.inner_vertices)
    new = []
    for lam in _refinement_directions(spec, poly, v):
        if any(np.max(np.abs(lam - d)) <= 1e-12 for d in approx.directions):
            continue
        sp = support_point(lam, spec.mu, spec.vfuncs, resolution)
        if sp.h - lam @ v > 1e-10:
            new.append((lam, sp))
    if not new:
        return approx, 0
    return approx.add_samples([d for d, _ in new], [s.h for _, s in new],
                              [s.point for _, s in new], [s.witness for _, s in new]), len(new)


def _outer_f_max(spec, approx):
    try:
        outer = approx.outer_vertices
    except (ValueError, QhullError):
        return None
    if outer.size == 0:
        return None
    cvals = spec.constraint.values_many(outer)
    ok = np.ones(len(outer), dtype=bool) if cvals.shape[1] == 0 else cvals.min(axis=1) >= -FEAS_TOL
    if not ok.any():
        return None
    return float(spec.objective.evaluate_many(outer[ok]).max())


def _generic_primal(spec, directions, resolution, max_refine):
    approx = approximate_set(spec.mu, spec.vfuncs, directions, resolution)
    rounds = 0
    while True:
        found = _maximize_over_polytope(spec, _Polytope(approx.inner_vertices))
        if found is None:
            raise InfeasibleProblem("no point of the inner polytope satisfies the constraint set")
        v, val = found
        if rounds >= max_refine:
            break
        approx, added = _refine(spec, approx, v, resolution)
        if not added:
            break
        rounds += 1
    return approx, v, val, rounds


def solve_generic(spec, directions=None, resolution=DEFAULT_RESOLUTION, max_refine=40):
    """Maximize ``f`` over the possibility set intersected with ``D``.

    Builds a set approximation, maximizes ``f`` over its inner polytope by
    dense evaluation plus a constrained local polish, and refines the
    approximation with support points in the normal directions of facets
    through the incumbent until no facet there can be pushed outward.  The
    returned value is achievable (it is a lower bound on the true optimum
    up to grid error).

    Raises
    ------
    InfeasibleProblem
        If no point of the inner polytope satisfies ``D``.
    """
    approx, v, val, rounds = _generic_primal(spec, directions, resolution, max_refine)
    P = implement_point(v, approx, tol=FEAS_TOL)
    upper = _outer_f_max(spec, approx)
    return _finish(
        spec, val, v, P,
        method="generic",
        refinement_rounds=rounds,
        directions=int(len(approx.directions)),
        sandwich_gap=float(approx.sandwich_gap()),
        f_gap_estimate=None if upper is None else max(0.0, upper - val),
    )


# ---------------------------------------------------------------- Frank-Wolfe


def _correct_weights(f, S, alpha):
    """Re-maximize ``f`` over the convex hull of the active atoms."""
    res = minimize(
        lambda a: -f(a @ S),
        alpha,
        jac=lambda a: -(S @ f.gradient(a @ S)),
        bounds=[(0.0, 1.0)] * len(alpha),
        constraints=[{"type": "eq", "fun": lambda a: a.sum() - 1.0, "jac": lambda a: np.ones_like(a)}],
        method="SLSQP",
        options={"ftol": 1e-16, "maxiter": 200},
    )
    a = np.clip(res.x, 0.0, None)
    a /= a.sum()
    return a if f(a @ S) >= f(alpha @ S) else alpha


def solve_smooth(spec, max_iter=500, resolution=DEFAULT_RESOLUTION, tol=FW_TOL, step="line-search",
                 corrective=True):
    """Frank-Wolfe (with away steps) over the possibility set.

    The linear maximization oracle at ``v`` is the support point in the
    gradient direction.  Iteration stops once the Frank-Wolfe gap
    ``grad f(v) @ (s - v)`` is at most ``tol``, which is the first-order
    optimality condition up to ``tol``; for concave ``f`` it certifies a
    global optimum.  With ``corrective`` set, the weights on the active
    atoms are re-optimized after every step (fully corrective variant).
    ``step="harmonic"`` uses plain ``2 / (k + 2)`` steps instead.

    Raises
    ------
    MaxIterations
        With the best iterate as ``best`` and its gap as ``residual``.
    """
    if not isinstance(spec.constraint, Unconstrained):
        raise ValueError("solve_smooth handles unconstrained problems only")
    f = spec.objective
    S = [spec.no_info_point()]
    W = [SignalStructure.delta(spec.mu)]
    alpha = np.array([1.0])
    v = S[0].copy()
    gap = np.inf
    for it in range(1, max_iter + 1):
        g = f.gradient(v)
        if np.linalg.norm(g) <= 1e-14:
            gap = 0.0
            break
        sp = support_point(g, spec.mu, spec.vfuncs, resolution)
        gap = float(g @ (sp.point - v))
        if gap <= tol:
            break
        pts = np.array(S)
        j = int(np.argmin(pts @ g))
        away_gap = float(g @ (v - pts[j]))
        if step == "harmonic" or gap >= away_gap or len(S) == 1:
            d = sp.point - v
            t = 2.0 / (it + 1) if step == "harmonic" else f.line_maximize(v, d, 1.0)
            alpha = (1.0 - t) * alpha
            hit = [i for i, s in enumerate(S) if np.max(np.abs(s - sp.point)) <= 1e-12]
            if hit:
                alpha[hit[0]] += t
            else:
                S.append(sp.point)
                W.append(sp.witness)
                alpha = np.append(alpha, t)
        else:
            tmax = alpha[j] / (1.0 - alpha[j])
            t = f.line_maximize(v, v - pts[j], tmax)
            alpha = (1.0 + t) * alpha
            alpha[j] -= t
        if corrective and step != "harmonic" and len(S) > 1:
            alpha = _correct_weights(f, np.array(S), alpha)
        keep = alpha > 1e-15
        S = [s for s, kf in zip(S, keep) if kf]
        W = [w for w, kf in zip(W, keep) if kf]
        alpha = alpha[keep] / alpha[keep].sum()
        v = alpha @ np.array(S)
    else:
        best = _finish(spec, f(v), v, mix_many(W, alpha), method="smooth", iterations=max_iter, fw_gap=gap)
        raise MaxIterations(f"Frank-Wolfe gap {gap:.3g} after {max_iter} iterations", best=best, residual=gap)
    g = f.gradient(v)
    norm = np.linalg.norm(g)
    # a vanishing gradient means an interior maximum of f; no direction is exposed
    mult = {"lambda": g / norm if norm > GRAD_TOL else np.zeros_like(g)}
    return _finish(spec, f(v), v, mix_many(W, alpha), mult, method="smooth", iterations=it, fw_gap=gap)


# ---------------------------------------------------------------- multipliers


def recover_multipliers(spec, v_star, generators, resolution=DEFAULT_RESOLUTION, tol=1e-10, max_iter=200):
    """Nonnegative weights ``w`` with ``lam = sum_k w_k a_k`` exposing ``v_star``.

    Minimizes the support gap ``phi(w) = h(lam) - lam @ v_star`` over the
    unit simplex by Kelley's cutting-plane method; ``phi`` is convex and a
    support point ``s`` at ``lam`` gives the subgradient
    ``(a_k @ (s - v_star))_k``.  Returns ``(w, lam, phi)`` at the best
    iterate.

    Raises
    ------
    NonConvergence
        If the cutting-plane bound does not close within ``max_iter``.
    """
    A = np.atleast_2d(np.asarray(generators, dtype=float))
    K = A.shape[0]
    cuts = []
    best = None

    def evaluate(w):
        lam = w @ A
        if np.linalg.norm(lam) <= 1e-14:
            return 0.0, lam, np.zeros(K)
        sp = support_point(lam, spec.mu, spec.vfuncs, resolution)
        scale = np.linalg.norm(lam)
        return scale * sp.h - lam @ v_star, lam, A @ (sp.point - v_star)

    for w in np.eye(K):
        phi, lam, sub = evaluate(w)
        cuts.append(sub)
        if best is None or phi < best[2]:
            best = (w, lam, phi)
    for _ in range(max_iter):
        if best[2] <= tol:
            break
        C = np.array(cuts)
        res = linprog(
            np.r_[np.zeros(K), 1.0],
            A_ub=np.column_stack([C, -np.ones(len(C))]),
            b_ub=np.zeros(len(C)),
            A_eq=np.r_[np.ones(K), 0.0][None, :],
            b_eq=[1.0],
            bounds=[(0, None)] * K + [(None, None)],
            method="highs",
        )
        w = np.clip(res.x[:K], 0.0, None)
        w /= w.sum()
        lower = res.x[K]
        phi, lam, sub = evaluate(w)
        cuts.append(sub)
        if phi < best[2]:
            best = (w, lam, phi)
        if best[2] - lower <= tol:
            break
    else:
        raise NonConvergence("cutting planes did not close the support gap", best=best, residual=best[2])
    return best


def _scaled(w, lam):
    norm = np.linalg.norm(lam)
    if norm <= 1e-14:
        return w, lam
    return w / norm, lam / norm


# ---------------------------------------------------------------- slack constraints


def _check_tail_invariance(spec, m):
    rng = np.random.default_rng(0)
    n = spec.n
    for v in rng.uniform(-1.0, 1.0, size=(5, n)):
        w = v.copy()
        w[n - m:] += rng.normal(size=m)
        if abs(spec.objective(v) - spec.objective(w)) > 1e-12:
            raise ValueError("objective must not depend on the slack coordinates")


def solve_with_slack(spec, directions=None, resolution=DEFAULT_RESOLUTION):
    """Problems whose constraints are ``v_i >= 0`` on ``m`` slack coordinates.

    ``f`` must ignore the slack coordinates.  The optimum is computed on the
    possibility set of all ``n + m`` value functions, and a unit direction
    ``lam`` is recovered so that the optimal structure maximizes
    ``E_P[sum_i lam_i V^i]``.  Components of ``lam`` on slack coordinates
    whose constraint is not binding are zero.
    """
    con = spec.constraint
    if not isinstance(con, (NonnegTail, Unconstrained)):
        raise ValueError("solve_with_slack needs a nonneg-tail constraint")
    m = con.m if isinstance(con, NonnegTail) else 0
    if m == 0:
        base = replace(spec, constraint=Unconstrained())
        return solve_generic(base, directions, resolution)
    _check_tail_invariance(spec, m)
    sol = solve_generic(spec, directions, resolution)
    v = sol.v_star
    n = spec.n
    binding = [n - m + j for j in range(m) if v[n - m + j] <= FEAS_TOL]
    grad = spec.objective.gradient(v)
    grad[n - m:] = 0.0
    gens = [grad] + [np.eye(n)[i] for i in binding]
    diag = dict(sol.diagnostics)
    try:
        w, lam, phi = recover_multipliers(spec, v, gens, resolution)
    except NonConvergence as exc:
        w, lam, phi = exc.best
        diag["multiplier_fallback"] = "cutting planes stopped early"
    w, lam = _scaled(w, lam)
    diag.update(method="slack", stationarity=float(phi / max(np.linalg.norm(gens, axis=1).max(), 1e-300)),
                binding=binding)
    return Solution(sol.value, v, sol.structure, {"lambda": lam, "eta": w[:1], "gamma": w[1:]}, diag)


# ---------------------------------------------------------------- convex duality


def solve_convex_constrained(spec, directions=None, resolution=DEFAULT_RESOLUTION, max_iter=500):
    """Quasiconcave ``f`` and constraint ``g(v) >= 0``, with multipliers.

    If the unconstrained Frank-Wolfe optimum already satisfies ``g`` the
    constraint is inactive and ``gamma = 0``.  Otherwise the primal is
    solved by :func:`solve_generic` and the multipliers ``eta, gamma >= 0``
    are recovered so that ``lam = eta grad f(v*) + gamma grad g(v*)``
    exposes ``v*`` (``v*`` maximizes ``lam @ v`` over the possibility set).

    ``diagnostics["stationarity"]`` is ``h(lam) - lam @ v*`` with ``|lam| = 1``.
    On cutting-plane failure the primal solution is returned with the
    fallback recorded in the diagnostics.
    """
    con = spec.constraint
    if isinstance(con, Unconstrained):
        con = None
    elif not isinstance(con, Sublevel):
        raise ValueError("solve_convex_constrained needs a sublevel constraint g(v) >= 0")
    base = replace(spec, constraint=Unconstrained())
    try:
        smooth = solve_smooth(base, max_iter=max_iter, resolution=resolution)
    except MaxIterations:
        smooth = None
    if smooth is not None and (con is None or con.g(smooth.v_star) >= -1e-9):
        g = spec.objective.gradient(smooth.v_star)
        norm = np.linalg.norm(g)
        if norm <= GRAD_TOL:
            # interior optimum: lam = 0 exposes every point
            eta, stat = 1.0, 0.0
            g = np.zeros_like(g)
        else:
            eta = 1.0 / norm
            sp = support_point(g, spec.mu, spec.vfuncs, resolution)
            stat = float(sp.h - (g / norm) @ smooth.v_star)
        diag = dict(smooth.diagnostics, method="convex", constraint_active=False, stationarity=stat)
        mult = {"lambda": g * eta, "eta": np.array([eta]), "gamma": np.array([0.0])}
        return Solution(smooth.value, smooth.v_star, smooth.structure, mult, diag)

    sol = solve_generic(spec, directions, resolution)
    v = sol.v_star
    gval = float(con.g(v))
    gens = [spec.objective.gradient(v)]
    binding = abs(gval) <= FEAS_TOL
    if binding:
        gens.append(con.g.gradient(v))
    diag = dict(sol.diagnostics, method="convex", constraint_active=binding, constraint_value=gval)
    try:
        w, lam, phi = recover_multipliers(spec, v, gens, resolution)
    except NonConvergence as exc:
        w, lam, phi = exc.best
        diag["fallback"] = "generic"
    w, lam = _scaled(w, lam)
    eta = w[0]
    gamma = w[1] if binding else 0.0
    norm = np.linalg.norm(lam)
    diag["stationarity"] = float(phi / norm) if norm > 1e-14 else 0.0
    mult = {"lambda": lam, "eta": np.array([eta]), "gamma": np.array([gamma])}
    return Solution(sol.value, v, sol.structure, mult, diag)


# ---------------------------------------------------------------- profiles


def value_profile(spec, priors, directions=None, resolution=DEFAULT_RESOLUTION, max_refine=40):
    """Optimal value at each prior.

    Returns a list of ``(mu, value, error)`` rows; ``value`` is ``None`` and
    ``error`` a message when the prior fails.
    """

    def one(mu):
        try:
            sol = solve_generic(spec.with_prior(mu), directions, resolution, max_refine)
            return check_belief(mu), sol.value, None
        except InfoDesignError as exc:
            return check_belief(mu), None, f"{type(exc).__name__}: {exc}"

    return pmap(one, list(priors))


def resolve_method(spec, method="auto"):
    """Concrete solver name; ``auto`` picks from the constraint type."""
    if method != "auto":
        return method
    if isinstance(spec.constraint, NonnegTail):
        return "slack"
    if isinstance(spec.constraint, Sublevel):
        return "convex"
    if isinstance(spec.constraint, Unconstrained) and spec.objective.analytic_gradient:
        return "smooth"
    return "generic"


def solve(spec, method="auto", **kwargs):
    """Dispatch to a solver by name (see :func:`resolve_method`)."""
    method = resolve_method(spec, method)
    table = {
        "generic": solve_generic,
        "smooth": solve_smooth,
        "slack": solve_with_slack,
        "convex": solve_convex_constrained,
    }
    if method not in table:
        raise ValueError(f"unknown method {method!r}")
    return table[method](spec, **kwargs)
