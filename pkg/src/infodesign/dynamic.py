"""Dynamic information acquisition and rational inattention with convex cost.

The Bellman operator is

    T(V)(mu) = max{ F(mu), sup_P  beta E_P[V(nu)] - f(E_P[H(mu) - H(nu)]) }

over Bayes-plausible ``P`` with information ``E_P[H(mu) - H(nu)] <= C``.
Posteriors are restricted to a simplex grid and ``V`` is tabulated on the
same grid, so each inner supremum is a finite problem.  With
``beta < 1`` the operator is a contraction on the band ``F <= V <= cav F``.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import ConvexHull, QhullError

from ._parallel import pmap
from ._validation import check_belief, check_positive_int
from .concavify import DEFAULT_RESOLUTION, concavify, concavify_grid, reduce_structure, simplex_grid
from .core import Entropy, LinearCombination, SignalStructure, Tabulated, ValueFunction, mix, value_function_from_dict
from .exceptions import MaxIterations, NonConvergence
from .objectives import CallableObjective, LinearObjective, Sublevel, Unconstrained
from .solver import ProblemSpec, solve_generic


@dataclass(frozen=True)
class Cost:
    """Convex, nondecreasing information cost ``f(x) = linear * x + quadratic * x**2``."""

    linear: float = 0.0
    quadratic: float = 0.0

    def __post_init__(self):
        if self.linear < 0 or self.quadratic < 0:
            raise ValueError("cost coefficients must be nonnegative")

    def __call__(self, x):
        return self.linear * x + self.quadratic * x * x

    def derivative(self, x):
        return self.linear + 2.0 * self.quadratic * x

    def argmax_on_segment(self, beta, p, q, H_mu):
        """``t`` in ``[0, 1]`` maximizing ``beta * v1 - f(H_mu - v2)`` along ``p + t (q - p)``."""
        d1, d2 = q[0] - p[0], q[1] - p[1]
        x0 = H_mu - p[1]
        cands = [0.0, 1.0]
        if self.quadratic > 0 and d2 != 0:
            t = (beta * d1 + self.linear * d2 + 2 * self.quadratic * d2 * x0) / (2 * self.quadratic * d2 * d2)
            cands.append(min(max(t, 0.0), 1.0))
        return max(cands, key=lambda t: beta * (p[0] + t * d1) - self(x0 - t * d2))

    def to_dict(self):
        return {"linear": self.linear, "quadratic": self.quadratic}


@dataclass(frozen=True, eq=False)
class DynamicSpec:
    """Stopping payoff ``F``, information measure ``H``, cost ``f``, discount, capacity and grid."""

    F: ValueFunction
    cost: Cost = field(default_factory=Cost)
    discount: float = 0.9
    capacity: float = math.inf
    resolution: int = DEFAULT_RESOLUTION
    n_states: int = 2
    H: ValueFunction = field(default_factory=Entropy)

    def __post_init__(self):
        if not 0.0 < self.discount < 1.0:
            raise ValueError("discount must lie strictly between 0 and 1")
        if self.capacity < 0:
            raise ValueError("capacity must be nonnegative")
        check_positive_int(self.resolution, "resolution")
        if np.min(self.F(self.grid.points)) < -1e-12:
            raise ValueError("stopping payoff F must be nonnegative")

    @property
    def grid(self):
        return simplex_grid(self.n_states, self.resolution)

    def to_dict(self):
        return {
            "spec_version": 1,
            "F": self.F.to_dict(),
            "H": self.H.to_dict(),
            "cost": self.cost.to_dict(),
            "discount": self.discount,
            "capacity": None if math.isinf(self.capacity) else self.capacity,
            "resolution": self.resolution,
            "n_states": self.n_states,
        }

    @classmethod
    def from_dict(cls, data):
        cap = data.get("capacity")
        return cls(
            value_function_from_dict(data["F"]),
            Cost(**data.get("cost", {})),
            float(data.get("discount", 0.9)),
            math.inf if cap is None else float(cap),
            int(data.get("resolution", DEFAULT_RESOLUTION)),
            int(data.get("n_states", 2)),
            value_function_from_dict(data["H"]) if "H" in data else Entropy(),
        )


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Values on a simplex grid, interpolated barycentrically off the grid."""

    grid: object
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (len(self.grid),):
            raise ValueError("one value per grid point")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, beliefs):
        return self.as_value_function()(beliefs)

    def as_value_function(self):
        return Tabulated(self.grid, self.values)

    def distance(self, other):
        return float(np.max(np.abs(self.values - other.values)))

    def to_dict(self):
        return {
            "spec_version": 1,
            "n_states": self.grid.n_states,
            "resolution": self.grid.resolution,
            "values": self.values.tolist(),
            "diagnostics": self.diagnostics,
        }

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"mu{i}" for i in range(self.grid.n_states)] + ["value"])
        for p, v in zip(self.grid.points, self.values):
            writer.writerow([repr(float(x)) for x in p] + [repr(float(v))])
        return buf.getvalue()


def initial_table(spec, kind="F"):
    """``F`` or its concave envelope on the grid, the two edges of the invariant band."""
    grid = spec.grid
    if kind == "F":
        return ValueTable(grid, spec.F(grid.points))
    if kind == "cav":
        return ValueTable(grid, concavify_grid(spec.F, spec.n_states, spec.resolution))
    raise ValueError("kind must be 'F' or 'cav'")


# ---------------------------------------------------------------- two states


def _clip_with_recipes(poly, recipes, level):
    """Clip a polygon to ``v2 >= level``, carrying convex-combination recipes."""
    out, out_r = [], []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = level - p[1], level - q[1]
        if fp <= 0:
            out.append(p)
            out_r.append(recipes[i])
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(p + t * (q - p))
            out_r.append(_blend(recipes[i], recipes[(i + 1) % n], t))
    return out, out_r


def _blend(r1, r2, t):
    out = {}
    for k, w in r1.items():
        out[k] = out.get(k, 0.0) + (1 - t) * w
    for k, w in r2.items():
        out[k] = out.get(k, 0.0) + t * w
    return {k: w for k, w in out.items() if w > 0}


def _binary_point(V, H, m, d, spec, want_policy):
    """Continuation value at grid index ``m`` (``Pr(x1) = m / d``) and its structure."""
    beta, cost = spec.discount, spec.cost
    H_mu = H[m]
    I, J = np.meshgrid(np.arange(0, m), np.arange(m + 1, d + 1), indexing="ij")
    I, J = I.ravel(), J.ravel()
    wj = (m - I) / (J - I)
    wi = 1.0 - wj
    pts = np.vstack([[V[m], H[m]], np.column_stack([wi * V[I] + wj * V[J], wi * H[I] + wj * H[J]])])
    if len(pts) >= 3:
        try:
            hull = ConvexHull(pts)
            order = list(hull.vertices)
        except QhullError:
            order = None
    else:
        order = None
    if order is None:
        # collinear: the segment between the extreme points
        axis = pts[np.argmax(np.linalg.norm(pts - pts[0], axis=1))] - pts[0]
        proj = pts @ axis
        order = [int(np.argmin(proj)), int(np.argmax(proj))]
    poly = [pts[k] for k in order]
    recipes = [{k: 1.0} for k in order]
    if math.isfinite(spec.capacity):
        poly, recipes = _clip_with_recipes(poly, recipes, H_mu - spec.capacity)
    best = (-np.inf, None, None)
    nv = len(poly)
    for i in range(nv):
        p, q = poly[i], poly[(i + 1) % nv]
        t = cost.argmax_on_segment(beta, p, q, H_mu)
        v = p + t * (q - p)
        val = beta * v[0] - cost(max(H_mu - v[1], 0.0))
        if val > best[0]:
            best = (val, v, _blend(recipes[i], recipes[(i + 1) % nv], t) if want_policy else None)
    if not want_policy:
        return best[0], None
    grid_pts = simplex_grid(2, d).points
    w_acc = {}
    for k, w in best[2].items():
        if k == 0:
            atoms = [(m, 1.0)]
        else:
            atoms = [(int(I[k - 1]), wi[k - 1]), (int(J[k - 1]), wj[k - 1])]
        for g, a in atoms:
            w_acc[g] = w_acc.get(g, 0.0) + w * a
    idx = sorted(w_acc)
    P = SignalStructure(np.array([w_acc[g] for g in idx]), grid_pts[idx])
    return best[0], P


# ---------------------------------------------------------------- general state spaces


def _general_point(table_vf, spec, mu, directions, want_policy):
    beta, cost = spec.discount, spec.cost
    H_mu = spec.H(mu)
    obj = CallableObjective(
        lambda v: beta * v[0] - cost(H_mu - v[1]),
        lambda v: np.array([beta, cost.derivative(H_mu - v[1])]),
    )
    if math.isfinite(spec.capacity):
        con = Sublevel(LinearObjective([0.0, 1.0], spec.capacity - H_mu))
    else:
        con = Unconstrained()
    problem = ProblemSpec(mu, [table_vf, spec.H], obj, con)
    sol = solve_generic(problem, directions, spec.resolution)
    return sol.value, (sol.structure if want_policy else None)


def bellman_operator(V, spec, directions=None, return_policy=False):
    """Apply the Bellman operator to a value table.

    For two states the inner supremum is exact on the grid: the achievable
    ``(E_P[V], E_P[H])`` pairs form the convex hull of two-point splits, and
    the concave objective is maximized edge by edge after clipping to the
    capacity.  Larger state spaces go through the possibility-set solver.

    Returns the new table, plus (with ``return_policy``) one entry per grid
    point: ``None`` where stopping is optimal, else the continuation
    structure.
    """
    grid = spec.grid
    Fv = spec.F(grid.points)
    Hv = spec.H(grid.points)
    d = spec.resolution
    if spec.n_states == 2:
        results = [_binary_point(V.values, Hv, m, d, spec, return_policy) for m in range(d + 1)]
    else:
        vf = V.as_value_function()
        results = pmap(lambda mu: _general_point(vf, spec, mu, directions, return_policy), list(grid.points))
    cont = np.array([r[0] for r in results])
    new = np.maximum(Fv, cont)
    table = ValueTable(grid, new)
    if not return_policy:
        return table
    policy = []
    for r, f, c in zip(results, Fv, cont):
        policy.append(None if f >= c else reduce_structure(r[1], [V.as_value_function(), spec.H]))
    return table, policy


def value_iterate(spec, tol=None, max_iter=10000, start="F", directions=None):
    """Iterate the Bellman operator to its fixed point.

    ``tol`` defaults to ``1e-8 * (1 - discount)``, which bounds the distance
    to the fixed point by ``1e-8``.  ``start`` is ``"F"``, ``"cav"`` or a
    :class:`ValueTable`.  The returned table's diagnostics carry the
    iteration count, the final step, and the largest observed ratio of
    consecutive steps (the empirical contraction factor).

    Raises
    ------
    MaxIterations
        With the last table as ``best`` and the last step as ``residual``.
    """
    if tol is None:
        tol = 1e-8 * (1.0 - spec.discount)
    V = start if isinstance(start, ValueTable) else initial_table(spec, start)
    prev_step, ratio = None, 0.0
    for it in range(1, max_iter + 1):
        W = bellman_operator(V, spec, directions)
        step = W.distance(V)
        if prev_step is not None and prev_step > 1e-10:
            ratio = max(ratio, step / prev_step)
        V, prev_step = W, step
        if step <= tol:
            diag = {"iterations": it, "final_step": step, "contraction_ratio": ratio, "tol": tol}
            return ValueTable(V.grid, V.values, diag)
    raise MaxIterations(f"value iteration step {prev_step:.3g} after {max_iter} sweeps", best=V, residual=prev_step)


# ---------------------------------------------------------------- rational inattention


@dataclass(frozen=True)
class RIResult:
    """Optimal experiment for costly information acquisition."""

    value: float
    structure: SignalStructure
    multiplier: float
    information: float
    diagnostics: dict

    def to_dict(self):
        return {
            "spec_version": 1,
            "value": self.value,
            "structure": self.structure.to_dict(),
            "multiplier": self.multiplier,
            "information": self.information,
            "diagnostics": self.diagnostics,
        }


def ri_solve(F, cost, mu, H=None, resolution=DEFAULT_RESOLUTION, max_iter=200, include_critical=True):
    """Maximize ``E_P[F] - f(E_P[H(mu) - H(nu)])`` over Bayes-plausible ``P``.

    Works through the multiplier ``t = f'(I)``: for fixed ``t`` the optimal
    experiment concavifies ``F + t H``.  A damped fixed-point iteration on
    ``t`` runs first; if it fails to settle, bisection on the increasing map
    ``t - f'(I(t))`` over ``[f'(0), f'(H(mu))]`` brackets the multiplier and
    the two experiments on either side of the jump are mixed optimally.
    The result has at most ``2 * n_states`` atoms.
    """
    H = Entropy() if H is None else H
    mu = check_belief(mu)
    H_mu = H(mu)

    def experiment(t):
        res = concavify(LinearCombination([1.0, t], [F, H]), mu, resolution, include_critical=include_critical)
        P = res.structure
        return P, max(H_mu - P.expectation(H), 0.0)

    def objective(P):
        return P.expectation(F) - cost(max(H_mu - P.expectation(H), 0.0))

    t = cost.derivative(0.0)
    method = "fixed-point"
    P, info = experiment(t)
    converged = False
    for it in range(1, max_iter + 1):
        target = cost.derivative(info)
        if abs(t - target) <= 1e-6:
            converged = True
            break
        t = 0.5 * t + 0.5 * target
        P, info = experiment(t)
    if not converged:
        method = "bisection"
        P, t, info = _ri_bisection(experiment, objective, cost, H_mu)
    val = objective(P)
    if P.support_size > 2 * mu.size:
        raise NonConvergence("experiment exceeds the support bound")
    diag = {"method": method, "iterations": it, "residual": float(abs(t - cost.derivative(info)))}
    return RIResult(float(val), P, float(t), float(info), diag)


def _ri_bisection(experiment, objective, cost, H_mu):
    lo, hi = cost.derivative(0.0), cost.derivative(H_mu)
    P_lo, I_lo = experiment(lo)
    P_hi, I_hi = experiment(hi)
    for _ in range(200):
        if hi - lo <= 1e-12:
            break
        mid = 0.5 * (lo + hi)
        P_mid, I_mid = experiment(mid)
        psi = mid - cost.derivative(I_mid)
        if abs(psi) <= 1e-6:
            return P_mid, mid, I_mid
        if psi < 0:
            lo, P_lo, I_lo = mid, P_mid, I_mid
        else:
            hi, P_hi, I_hi = mid, P_mid, I_mid
    res = minimize_scalar(lambda a: -objective(mix(P_lo, P_hi, a)), bounds=(0.0, 1.0), method="bounded",
                          options={"xatol": 1e-12})
    alpha = max([0.0, 1.0, float(res.x)], key=lambda a: objective(mix(P_lo, P_hi, a)))
    P = mix(P_lo, P_hi, alpha)
    info = alpha * I_lo + (1 - alpha) * I_hi
    t = 0.5 * (lo + hi)
    return P, t, info
