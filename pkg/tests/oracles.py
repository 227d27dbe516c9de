"""Brute-force references used by the tests.  Deliberately naive."""

import itertools

import numpy as np

from infodesign.core import DecisionUtility, Entropy, PiecewiseLinear
from infodesign.objectives import LinearObjective, QuadraticObjective


def binary_cav_bruteforce(fn, p, grid):
    """Best value over structures with at most two atoms on ``grid`` (plus ``p``)."""
    g = np.unique(np.append(np.asarray(grid, float), p))
    vals = fn(np.column_stack([1.0 - g, g]))
    best = float(vals[np.argmin(np.abs(g - p))])
    for i, j in itertools.combinations(range(g.size), 2):
        if g[i] < p < g[j]:
            w = (p - g[i]) / (g[j] - g[i])
            best = max(best, (1 - w) * vals[i] + w * vals[j])
    return best


def random_pwl(rng, d=12):
    """Piecewise-linear function with breakpoints on ``{k/d}``."""
    k = int(rng.integers(2, d))
    bps = np.sort(rng.choice(np.arange(1, d), size=k - 1, replace=False)) / d
    bps = np.concatenate([[0.0], bps, [1.0]])
    return PiecewiseLinear(bps, rng.uniform(-1.0, 1.0, bps.size))


def random_decision(rng, actions=3, states=2, low=0.0):
    return DecisionUtility(rng.uniform(low, 1.0, (actions, states)))


def random_concave_quadratic(rng, n=2, scale=1.0):
    B = rng.normal(size=(n, n))
    A = -(B @ B.T + 0.1 * np.eye(n)) * scale
    return QuadraticObjective(A, rng.normal(size=n))


def random_linear(rng, n=2):
    return LinearObjective(rng.normal(size=n))


# ---------------------------------------------------------------- screening


def _segment_endpoints(g, mu):
    """Extreme Bayes-plausible weightings on a 3-point support (a segment)."""
    cands = []
    for i in range(3):
        if abs(g[i] - mu) < 1e-12:
            w = np.zeros(3)
            w[i] = 1
            cands.append(w)
    for i, j in itertools.combinations(range(3), 2):
        a, b = sorted([i, j], key=lambda k: g[k])
        if g[a] < mu - 1e-12 and g[b] > mu + 1e-12:
            w = np.zeros(3)
            t = (mu - g[a]) / (g[b] - g[a])
            w[a], w[b] = 1 - t, t
            cands.append(w)
    if not cands:
        return None
    best, dm = (cands[0], cands[0]), -1.0
    for u, v in itertools.combinations(cands, 2):
        if np.abs(u - v).sum() > dm:
            dm, best = np.abs(u - v).sum(), (u, v)
    return best


def screening_bruteforce(F, V, pi, mu, d=8):
    """Two binary types, menu items with at most 3 grid atoms each.

    Each item ranges over a segment of weightings; the pair of segment
    parameters is a 2-d LP solved by enumerating constraint intersections.
    """
    g = np.arange(d + 1) / d
    P = np.column_stack([1 - g, g])
    Fv, Vv = [f(P) for f in F], [v(P) for v in V]
    segs = []
    for S in itertools.combinations(range(d + 1), 3):
        e = _segment_endpoints(g[list(S)], mu)
        if e is not None:
            segs.append((list(S), e))

    def lin(S, e, vals):
        a = e[0] @ vals[S]
        return a, e[1] @ vals[S] - a

    best = -np.inf
    for (S1, e1), (S2, e2) in itertools.product(segs, segs):
        v1, v2 = lin(S1, e1, Vv[0]), lin(S2, e2, Vv[1])
        f11, f12 = lin(S1, e1, Fv[0]), lin(S2, e2, Fv[0])
        f21, f22 = lin(S1, e1, Fv[1]), lin(S2, e2, Fv[1])
        A = np.array([[-1, 0], [1, 0], [0, -1], [0, 1], [-f11[1], f12[1]], [f21[1], -f22[1]]], float)
        b = np.array([0, 1, 0, 1, f11[0] - f12[0], f22[0] - f21[0]], float)
        c = np.array([pi[0] * v1[1], pi[1] * v2[1]])
        c0 = pi[0] * v1[0] + pi[1] * v2[0]
        for i, j in itertools.combinations(range(6), 2):
            M = A[[i, j]]
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            x = np.linalg.solve(M, b[[i, j]])
            if np.all(A @ x <= b + 1e-9):
                best = max(best, c @ x + c0)
    return best


# ---------------------------------------------------------------- voters


def random_voter_spec(rng):
    from infodesign.apps.voters import VoterSpec

    n = int(rng.integers(1, 6))
    m = int(rng.integers(1, n + 1))
    mu = rng.integers(10, 100) / 200
    th = rng.integers(5, 195, size=n) / 200
    Fs, cs = [], []
    for i in range(n):
        a = rng.uniform(0.5, 2)
        b = a * (1 - th[i]) / th[i]
        rows = [[a, 0], [0, b]]
        if rng.random() < 0.3:
            rows.append([0.6 * a, 0.5 * b])
        F = DecisionUtility(rows)
        Fs.append(F)
        if rng.random() < 0.25:
            cs.append(0.0)
            continue
        mt = rng.integers(int(mu * 200) + 1, 201) / 200
        cs.append(float((mt - mu) / mt * F([1.0, 0.0]) + mu / mt * F([1 - mt, mt])))
    return VoterSpec(float(mu), m, th, Fs, cs)


# ---------------------------------------------------------------- costly information


def ri_bruteforce(F, cost, p, d=10, H=None):
    """Best mixture of two grid-supported binary experiments, by dense search."""
    H = Entropy() if H is None else H
    g = np.arange(d + 1) / d
    B = np.column_stack([1 - g, g])
    Fv, Hv, Hm = F(B), H(B), H([1 - p, p])
    pairs = []
    k = np.argmin(abs(g - p))
    if abs(g[k] - p) < 1e-12:
        pairs.append((Fv[k], Hv[k]))
    for i in range(d + 1):
        for j in range(i + 1, d + 1):
            if g[i] <= p <= g[j]:
                w = (p - g[i]) / (g[j] - g[i])
                pairs.append(((1 - w) * Fv[i] + w * Fv[j], (1 - w) * Hv[i] + w * Hv[j]))
    P = np.array(pairs)
    al = np.linspace(0, 1, 2001)
    best = -np.inf
    for a in range(len(P)):
        for b in range(a, len(P)):
            m = np.outer(al, P[a]) + np.outer(1 - al, P[b])
            best = max(best, np.max(m[:, 0] - cost(np.maximum(Hm - m[:, 1], 0))))
    return best


# ---------------------------------------------------------------- constrained design


def design_candidates(mu, vfuncs, resolution=40):
    from infodesign.concavify import candidate_posteriors

    blocks = [candidate_posteriors(v, mu, resolution) for v in vfuncs]
    return np.unique(np.round(np.vstack(blocks), 14), axis=0)


def linear_design_lp(mu, vfuncs, coef, G=None, h=None, resolution=40):
    """``max coef . E_p V`` over weights on candidate posteriors, ``G E_p V >= h``."""
    from scipy.optimize import linprog

    pts = design_candidates(mu, vfuncs, resolution)
    Vals = np.array([v(pts) for v in vfuncs])
    kw = {}
    if G is not None:
        kw = {"A_ub": -np.atleast_2d(G) @ Vals, "b_ub": -np.atleast_1d(h)}
    res = linprog(-(np.asarray(coef) @ Vals), A_eq=pts.T, b_eq=mu, bounds=(0, None), method="highs", **kw)
    return None if res.status != 0 else -res.fun


def concave_design_slsqp(mu, vfuncs, f, g=None, resolution=40, starts=6, seed=0):
    """``max f(E_p V)`` (``g(E_p V) >= 0``) over weights on candidate posteriors."""
    from scipy.optimize import minimize

    mu = np.asarray(mu, float)
    pts = design_candidates(mu, vfuncs, resolution)
    Vals = np.array([v(pts) for v in vfuncs])
    cons = [{"type": "eq", "fun": lambda p: pts.T @ p - mu, "jac": lambda p: pts.T}]
    if g is not None:
        cons.append({"type": "ineq", "fun": lambda p: np.atleast_1d(g(Vals @ p)),
                     "jac": lambda p: (g.gradient(Vals @ p) @ Vals)[None, :]})
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(starts):
        # random Bayes-plausible start: mix the prior with random two-point splits
        p0 = rng.dirichlet(np.ones(len(pts)))
        p0 = 0.5 * p0 + 0.5 * np.isclose(pts, mu, atol=1e-12).all(axis=1).astype(float)
        res = minimize(lambda p: -f(Vals @ p), p0, jac=lambda p: -(f.gradient(Vals @ p) @ Vals),
                       bounds=[(0, None)] * len(pts), constraints=cons, method="SLSQP",
                       options={"ftol": 1e-14, "maxiter": 2000})
        p = np.clip(res.x, 0, None)
        ok = np.allclose(pts.T @ p, mu, atol=1e-7) and (g is None or g(Vals @ p) >= -1e-7)
        if ok:
            best = max(best, f(Vals @ p))
    return best


def bellman_bruteforce(values, spec, alphas=401):
    """Binary Bellman update by enumerating mixtures of two two-point splits."""
    d = spec.resolution
    g = np.arange(d + 1) / d
    B = np.column_stack([1 - g, g])
    Fv, Hv = spec.F(B), spec.H(B)
    al = np.linspace(0, 1, alphas)[:, None, None]
    out = np.empty(d + 1)
    for m in range(d + 1):
        splits = [(values[m], Hv[m])]
        for i in range(m + 1):
            for j in range(m, d + 1):
                if i < m < j:
                    w = (g[m] - g[i]) / (g[j] - g[i])
                    splits.append(((1 - w) * values[i] + w * values[j], (1 - w) * Hv[i] + w * Hv[j]))
        S = np.array(splits)
        best = -np.inf
        for a in range(len(S)):
            # along alpha*S[a] + (1-alpha)*S[b] information is linear and the
            # objective a concave quadratic: add the capacity crossing and the vertex
            dv, dh = S[a, 0] - S[:, 0], S[a, 1] - S[:, 1]
            i0 = Hv[m] - S[:, 1]
            with np.errstate(divide="ignore", invalid="ignore"):
                cross = (i0 - spec.capacity) / dh
                slope = spec.discount * dv + spec.cost.derivative(i0) * dh
                vertex = slope / (2 * spec.cost.quadratic * dh ** 2)
            extra = np.clip(np.nan_to_num(np.column_stack([cross, vertex]), nan=0.0, posinf=0.0, neginf=0.0), 0, 1)
            alphas = np.concatenate([np.broadcast_to(al[:, 0, 0], (len(S), al.shape[0])), extra], axis=1).T
            mixv = alphas[..., None] * S[a] + (1 - alphas[..., None]) * S
            ev, eh = mixv[..., 0], mixv[..., 1]
            info = np.maximum(Hv[m] - eh, 0.0)
            ok = info <= spec.capacity + 1e-12
            obj = np.where(ok, spec.discount * ev - spec.cost(info), -np.inf)
            best = max(best, obj.max())
        out[m] = max(Fv[m], best)
    return out


def screening_two_atom_bruteforce(spec, d=8):
    """Binary menus whose items have at most two grid atoms, by enumeration."""
    mu = spec.mu[1]
    g = np.unique(np.append(np.arange(d + 1) / d, mu))
    splits = []
    for i, j in itertools.combinations_with_replacement(range(g.size), 2):
        if g[i] <= mu <= g[j] and (g[i] < g[j] or abs(g[i] - mu) < 1e-12):
            w = 0.0 if g[j] == g[i] else (mu - g[i]) / (g[j] - g[i])
            post = np.array([[1 - g[i], g[i]], [1 - g[j], g[j]]])
            splits.append((np.array([1 - w, w]), post))
    N = spec.n_types
    EF = np.array([[wt @ f(post) for wt, post in splits] for f in spec.decision_utilities])
    EV = np.array([[wt @ v(post) for wt, post in splits] for v in spec.sender_values])
    best = -np.inf
    for combo in itertools.product(range(len(splits)), repeat=N):
        ok = all(EF[t, combo[t]] >= EF[t, combo[s]] - 1e-12 for t in range(N) for s in range(N))
        if ok:
            best = max(best, sum(spec.type_probs[t] * EV[t, combo[t]] for t in range(N)))
    return best
