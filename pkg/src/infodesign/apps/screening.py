"""Screening receivers with a menu of signal structures.

Types ``theta = 1..N`` have decision utility ``F_theta``, the sender gets
``V_theta`` and types occur with probability ``pi_theta``.  The sender
offers one Bayes-plausible structure per type subject to incentive
compatibility ``E_{P_theta}[F_theta] >= E_{P_theta'}[F_theta]``.

With posteriors restricted to a grid the problem is a linear program in the
atom weights of all menu items; its solution is then thinned item by item
to at most ``n_states + N + 1`` atoms without changing any expectation that
enters the objective or the constraints.
"""

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .._parallel import pmap
from .._validation import check_belief, check_positive_int
from ..concavify import DEFAULT_RESOLUTION, reduce_structure, simplex_grid
from ..core import SignalStructure, ValueFunction, value_function_from_dict
from ..exceptions import InfeasibleProblem, NumericalRankFailure
from ..lp import solve_lp

IC_TOL = 1e-8
EXHAUSTIVE_LIMIT = 5000


@dataclass(frozen=True, eq=False)
class ScreenSpec:
    mu: np.ndarray
    decision_utilities: list
    sender_values: list
    type_probs: np.ndarray

    def __post_init__(self):
        mu = check_belief(self.mu)
        pi = np.asarray(self.type_probs, dtype=float).ravel()
        N = pi.size
        if len(self.decision_utilities) != N or len(self.sender_values) != N:
            raise ValueError("one decision utility and one sender value per type")
        funcs = list(self.decision_utilities) + list(self.sender_values)
        if not all(isinstance(f, ValueFunction) for f in funcs):
            raise ValueError("utilities must be ValueFunction instances")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise ValueError("type probabilities must form a probability vector")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "type_probs", pi / pi.sum())

    @property
    def n_types(self):
        return self.type_probs.size

    def to_dict(self):
        return {
            "spec_version": 1,
            "mu": self.mu.tolist(),
            "decision_utilities": [f.to_dict() for f in self.decision_utilities],
            "sender_values": [f.to_dict() for f in self.sender_values],
            "type_probs": self.type_probs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["mu"],
            [value_function_from_dict(f) for f in data["decision_utilities"]],
            [value_function_from_dict(f) for f in data["sender_values"]],
            data["type_probs"],
        )


@dataclass(frozen=True, eq=False)
class MenuResult:
    menu: list
    value: float
    ic_slack: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "spec_version": 1,
            "value": self.value,
            "menu": [P.to_dict() for P in self.menu],
            "ic_slack": self.ic_slack.tolist(),
            "diagnostics": self.diagnostics,
        }


def menu_value(spec, menu):
    return float(sum(p * P.expectation(V) for p, P, V in zip(spec.type_probs, menu, spec.sender_values)))


def ic_slack(spec, menu):
    """``S[t, s] = E_{P_t}[F_t] - E_{P_s}[F_t]``; incentive compatible iff all entries >= 0."""
    N = spec.n_types
    E = np.array([[P.expectation(spec.decision_utilities[t]) for P in menu] for t in range(N)])
    return np.diag(E)[:, None] - E


def _candidates(spec, resolution):
    pts = simplex_grid(spec.mu.size, resolution).points
    if np.min(np.max(np.abs(pts - spec.mu), axis=1)) > 1e-12:
        pts = np.vstack([pts, spec.mu])
    return pts


def _menu_lp(spec, pts, Fv, Vv, supports=None):
    """Solve the menu LP with item ``t`` restricted to columns ``supports[t]``.

    Returns ``(value, weights per item)`` or ``None`` when infeasible.
    """
    N, K = spec.n_types, spec.mu.size
    cols = [np.arange(len(pts)) if supports is None else np.asarray(supports[t]) for t in range(N)]
    offs = np.concatenate([[0], np.cumsum([len(c) for c in cols])])
    nv = offs[-1]
    c = np.zeros(nv)
    A_eq = np.zeros((N * K, nv))
    for t in range(N):
        sl = slice(offs[t], offs[t + 1])
        c[sl] = spec.type_probs[t] * Vv[t, cols[t]]
        A_eq[t * K:(t + 1) * K, sl] = pts[cols[t]].T
    b_eq = np.tile(spec.mu, N)
    rows = []
    for t in range(N):
        for s in range(N):
            if s == t:
                continue
            r = np.zeros(nv)
            r[offs[t]:offs[t + 1]] = -Fv[t, cols[t]]
            r[offs[s]:offs[s + 1]] = Fv[t, cols[s]]
            rows.append(r)
    A_ub = np.array(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    try:
        res = solve_lp(c, A_eq, b_eq, A_ub, b_ub)
    except (InfeasibleProblem, NumericalRankFailure, np.linalg.LinAlgError):
        return None
    x = res.x
    return float(res.value), [(cols[t], x[offs[t]:offs[t + 1]]) for t in range(N)]


def _structures(pts, parts):
    out = []
    for cols, w in parts:
        keep = w > 1e-14
        out.append(SignalStructure(w[keep] / w[keep].sum(), pts[cols[keep]]))
    return out


def _local_search(spec, pts, Fv, Vv, cap, start, max_sweeps=50):
    cur = [list(s) for s in start]
    found = _menu_lp(spec, pts, Fv, Vv, cur)
    best_val = -np.inf if found is None else found[0]
    G = len(pts)
    for _ in range(max_sweeps):
        improved = False
        for t in range(spec.n_types):
            for pos in range(cap):
                for g in range(G):
                    if g in cur[t]:
                        continue
                    trial = [list(s) for s in cur]
                    trial[t][pos] = g
                    res = _menu_lp(spec, pts, Fv, Vv, trial)
                    if res is not None and res[0] > best_val + 1e-12:
                        cur, best_val, found, improved = trial, res[0], res, True
        if not improved:
            break
    return best_val, found


def _exhaustive(spec, pts, Fv, Vv, cap):
    subsets = list(itertools.combinations(range(len(pts)), cap))
    best = (-np.inf, None)
    for combo in itertools.product(subsets, repeat=spec.n_types):
        res = _menu_lp(spec, pts, Fv, Vv, [list(c) for c in combo])
        if res is not None and res[0] > best[0] + 1e-12:
            best = res
    return best


def screening_solve(spec, resolution=DEFAULT_RESOLUTION, atoms_cap=None, starts=16, seed=0,
                    exhaustive_limit=EXHAUSTIVE_LIMIT):
    """Optimal incentive-compatible menu on a posterior grid.

    Parameters
    ----------
    spec : ScreenSpec
    resolution : int
        Grid resolution for posteriors (the prior is always a candidate).
    atoms_cap : int, optional
        Maximum atoms per menu item; defaults to ``(N + 2) * n_states``.
        When the LP optimum needs more, every choice of supports of size
        ``atoms_cap`` is tried if there are at most ``exhaustive_limit`` of
        them (exact on the grid).  Otherwise a swap local search runs from
        the LP's heaviest atoms and ``starts`` random supports
        (deterministic given ``seed``); it may stop at a local optimum.

    Returns
    -------
    MenuResult
    """
    resolution = check_positive_int(resolution, "resolution")
    N, K = spec.n_types, spec.mu.size
    cap = (N + 2) * K if atoms_cap is None else check_positive_int(atoms_cap, "atoms_cap")
    if cap < K:
        raise ValueError("atoms_cap must be at least the number of states")
    pts = _candidates(spec, resolution)
    Fv = np.array([f(pts) for f in spec.decision_utilities])
    Vv = np.array([v(pts) for v in spec.sender_values])
    full = _menu_lp(spec, pts, Fv, Vv)
    if full is None:
        raise NumericalRankFailure("menu LP failed although identical menus are feasible")
    menu = _structures(pts, full[1])
    menu = [reduce_structure(P, [spec.sender_values[t]] + list(spec.decision_utilities)) for t, P in enumerate(menu)]
    diag = {"lp_value": full[0], "method": "lp"}
    n_combos = comb(len(pts), cap) ** N
    if max(P.support_size for P in menu) > cap and n_combos <= exhaustive_limit:
        best = _exhaustive(spec, pts, Fv, Vv, cap)
        menu = _structures(pts, best[1])
        diag.update(method="exhaustive", candidates=n_combos)
    elif max(P.support_size for P in menu) > cap:
        rng = np.random.default_rng(seed)
        verts = [int(np.argmin(np.max(np.abs(pts - e), axis=1))) for e in np.eye(K)]
        first = []
        for cols, w in full[1]:
            order = [int(cols[i]) for i in np.argsort(-w, kind="stable")]
            first.append((order + [g for g in range(len(pts)) if g not in order])[:cap])
        inits = [first]
        others = [g for g in range(len(pts)) if g not in verts]
        for _ in range(starts):
            inits.append([verts + list(rng.choice(others, size=cap - K, replace=False)) for _ in range(N)])
        best = (-np.inf, None)
        # starts are independent; reduce in start order so ties break deterministically
        for val, found in pmap(lambda init: _local_search(spec, pts, Fv, Vv, cap, init), inits):
            if found is not None and val > best[0] + 1e-12:
                best = (val, found)
        menu = _structures(pts, best[1][1])
        diag.update(method="local-search", starts=len(inits))
    slack = ic_slack(spec, menu)
    for P in menu:
        if np.max(np.abs(P.barycenter() - spec.mu)) > 1e-9:
            raise NumericalRankFailure("menu item lost Bayes plausibility")
    if slack.min() < -IC_TOL:
        raise NumericalRankFailure(f"menu violates incentive compatibility by {-slack.min():.3g}")
    diag["max_support"] = max(P.support_size for P in menu)
    return MenuResult(menu, menu_value(spec, menu), slack, diag)
