"""Concave envelopes on the belief simplex and Caratheodory reduction."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_belief, check_positive_int
from .core import SignalStructure, SimplexGrid
from .exceptions import InfeasiblePrior, NumericalRankFailure
from .lp import solve_lp

DEFAULT_RESOLUTION = 40


@lru_cache(maxsize=64)
def simplex_grid(n_states, resolution):
    """Cached :class:`SimplexGrid`; grids are immutable so sharing is safe."""
    return SimplexGrid(n_states, resolution)


@dataclass(frozen=True)
class CavResult:
    value: float
    structure: SignalStructure
    grid_resolution: int
    lp_status: str


def candidate_posteriors(vf, mu, resolution, extra_points=None, include_critical=True):
    """Posteriors the envelope LP may use: the grid, the prior, and kinks of ``vf``.

    The first ``n_states`` rows returned by the grid are not guaranteed to be
    the vertices; use :func:`vertex_columns` for a starting basis.
    """
    mu = np.asarray(mu, dtype=float)
    grid = simplex_grid(mu.size, resolution)
    blocks = [grid.points, mu[None, :]]
    if include_critical and vf is not None:
        blocks.append(vf.critical_points(mu.size))
    if extra_points is not None and len(extra_points):
        blocks.append(np.atleast_2d(np.asarray(extra_points, dtype=float)))
    return np.vstack(blocks)


def vertex_columns(n_states, resolution):
    return simplex_grid(n_states, resolution).vertex_indices


def envelope_lp(points, values, mu, start_basis):
    """Solve ``max sum p_g values_g`` s.t. ``sum p_g g = mu``, ``p >= 0``.

    ``start_basis`` must list, for each state, a column equal to that
    vertex of the simplex.  Returns ``(value, structure, lp_status)``.
    """
    res = solve_lp(values, points.T, mu, basis=start_basis)
    support = res.x > 1e-14
    w = res.x[support]
    w = w / w.sum()
    structure = SignalStructure(w, points[support])
    if np.max(np.abs(structure.barycenter() - mu)) > 1e-9:
        raise InfeasiblePrior("envelope LP lost Bayes plausibility; prior outside candidate hull")
    return structure, res.status


def concavify(vf, mu, resolution=DEFAULT_RESOLUTION, extra_points=None, include_critical=True):
    """Concave envelope of ``vf`` at ``mu`` and a supporting signal structure.

    Solves the envelope LP over posteriors on the simplex grid of the given
    resolution (plus ``mu`` itself and any two-state kinks of ``vf``).  The
    optimal basic solution has at most ``n_states`` atoms.

    Parameters
    ----------
    vf : ValueFunction
    mu : array-like
        Prior belief.
    resolution : int
        Grid resolution ``d``; posteriors are multiples of ``1/d``.
    extra_points : array-like, optional
        Additional candidate posteriors.

    Returns
    -------
    CavResult
    """
    resolution = check_positive_int(resolution, "resolution", minimum=1)
    mu = check_belief(mu)
    points = candidate_posteriors(vf, mu, resolution, extra_points, include_critical)
    values = vf(points)
    structure, status = envelope_lp(points, values, mu, vertex_columns(mu.size, resolution))
    return CavResult(structure.expectation(vf), structure, resolution, status)


def concavify_grid(vf, n_states, resolution=DEFAULT_RESOLUTION):
    """Envelope values at every grid point, sharing one function evaluation."""
    grid = simplex_grid(n_states, resolution)
    vals = vf(grid.points)
    basis = grid.vertex_indices
    out = np.empty(len(grid))
    for i, g in enumerate(grid.points):
        structure, _ = envelope_lp(grid.points, vals, g, basis)
        out[i] = structure.expectation(vf)
    return out


def caratheodory_reduce(weights, points, target=None, tol=1e-10, return_indices=False):
    """Rewrite a convex combination in R^m with at most ``m + 1`` atoms.

    Repeatedly finds an affine dependence among the atoms (a null vector of
    the points stacked over a row of ones) and moves along it until one
    weight hits zero.  The barycenter is unchanged.  Inputs that already
    have at most ``m + 1`` atoms come back unchanged.

    Returns ``(weights, points)`` of the reduced combination, plus the
    indices of the surviving input atoms when ``return_indices`` is set.
    Raises :class:`NumericalRankFailure` if the dependence cannot be
    resolved at ``tol``.
    """
    w = np.asarray(weights, dtype=float).ravel().copy()
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] != w.size:
        raise ValueError("one weight per point")
    if w.min() < -1e-12 or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must form a probability vector")
    if target is not None:
        gap = np.max(np.abs(w @ P - np.asarray(target, dtype=float)))
        if gap > 1e-9:
            raise ValueError(f"weights do not average to target (gap {gap:.3g})")
    m = P.shape[1]
    idx = np.flatnonzero(w > 0)
    scale = max(1.0, float(np.abs(P).max()))
    while idx.size > m + 1:
        M = np.vstack([P[idx].T / scale, np.ones(idx.size)])
        _, s, vt = np.linalg.svd(M)
        z = vt[-1]
        if np.linalg.norm(M @ z) > tol * max(1.0, s[0]):
            raise NumericalRankFailure("affine dependence not found at tolerance")
        if z.max() <= 0:
            z = -z
        pos = np.flatnonzero(z > 1e-14)
        if pos.size == 0:
            raise NumericalRankFailure("null vector has no positive entries")
        ratios = w[idx[pos]] / z[pos]
        j = idx[pos[np.argmin(ratios)]]
        w[idx] = np.clip(w[idx] - ratios.min() * z, 0.0, None)
        w[j] = 0.0
        w[w < 1e-15] = 0.0
        idx = np.flatnonzero(w > 0)
    w_out = w[idx] / w[idx].sum()
    if return_indices:
        return w_out, P[idx], idx
    return w_out, P[idx]


def reduce_structure(P, vfuncs):
    """Shrink ``P`` to at most ``n_states + len(vfuncs)`` atoms.

    Both the barycenter and every ``E_P[V^i]`` are preserved, because the
    reduction runs on the lifted points ``(nu, V^1(nu), ..., V^n(nu))``
    (the last belief coordinate is implied by the others).
    """
    post = P.posteriors
    cols = [post[:, :-1]] + [v(post)[:, None] for v in vfuncs]
    lifted = np.hstack(cols)
    if lifted.shape[1] == 0 or P.support_size <= lifted.shape[1] + 1:
        return P
    w, _, idx = caratheodory_reduce(P.weights, lifted, tol=1e-9, return_indices=True)
    return SignalStructure(w, post[idx])
