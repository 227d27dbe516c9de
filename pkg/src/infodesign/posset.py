"""The set of jointly achievable expected values at a prior.

For value functions ``V^1..V^n`` and prior ``mu`` the possibility set is

    { (E_P[V^1], ..., E_P[V^n]) : E_P[nu] = mu }.

It is compact and convex, and its support function in direction ``lam`` is
the concave envelope of ``sum_i lam_i V^i`` at ``mu``.  Sampling directions
therefore yields an inner polytope (the support points) and an outer
polytope (the supporting halfspaces) that sandwich the set.
"""

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._parallel import pmap
from ._validation import check_belief, check_direction, check_positive_int
from .concavify import DEFAULT_RESOLUTION, caratheodory_reduce, concavify
from .core import LinearCombination, SignalStructure, ValueFunction, expected_values, mix_many
from .exceptions import Indeterminate, NotInSet
from .geometry import affine_basis, halfspace_vertices, hausdorff, hull_distance, sample_directions

#: One tolerance for membership, boundary and implementation checks.
BOUNDARY_TOL = 1e-6


class SupportPoint(NamedTuple):
    h: float
    point: np.ndarray
    witness: SignalStructure


def default_direction_count(n):
    return max(2 * n + 2, 16)


def support_point(direction, mu, vfuncs, resolution=DEFAULT_RESOLUTION):
    """Maximize ``direction @ v`` over the possibility set.

    The direction is normalized first.  Returns the support value, the
    maximizing value vector and a witness structure with at most
    ``n_states`` atoms.
    """
    vfuncs = list(vfuncs)
    lam = check_direction(direction, len(vfuncs))
    cav = concavify(LinearCombination(lam, vfuncs), mu, resolution)
    v = expected_values(cav.structure, vfuncs)
    return SupportPoint(float(lam @ v), v, cav.structure)


@dataclass(frozen=True, eq=False)
class SetApprox:
    """Inner/outer polytope sandwich of a possibility set."""

    mu: np.ndarray
    vfuncs: list
    directions: np.ndarray
    h: np.ndarray
    points: np.ndarray
    witnesses: list
    resolution: int = DEFAULT_RESOLUTION
    _vertex_index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        keep = []
        for i, p in enumerate(self.points):
            if not any(np.max(np.abs(p - self.points[j])) <= 1e-12 for j in keep):
                keep.append(i)
        object.__setattr__(self, "_vertex_index", np.array(keep, dtype=int))

    @property
    def dim(self):
        return len(self.vfuncs)

    @property
    def inner_vertices(self):
        return self.points[self._vertex_index]

    @property
    def inner_witnesses(self):
        return [self.witnesses[i] for i in self._vertex_index]

    @property
    def outer_halfspaces(self):
        return list(zip(self.directions, self.h))

    @property
    def no_info_point(self):
        return np.array([v(self.mu) for v in self.vfuncs])

    @cached_property
    def outer_vertices(self):
        return halfspace_vertices(self.directions, self.h)

    @cached_property
    def affine_dim(self):
        return affine_basis(self.inner_vertices)[1].shape[0]

    def sandwich_gap(self):
        """Hausdorff distance between the inner and outer polytopes."""
        inner = self.inner_vertices
        return max(hull_distance(x, inner)[0] for x in self.outer_vertices)

    def halfspace_violation(self, v):
        return float(np.max(self.directions @ np.asarray(v, float) - self.h))

    def extend(self, new_directions):
        """A new approximation with extra sampled directions."""
        new_directions = np.atleast_2d(np.asarray(new_directions, dtype=float))
        return self.add_samples(*_sample(self.mu, self.vfuncs, new_directions, self.resolution))

    def add_samples(self, directions, h, points, witnesses):
        """A new approximation with already computed support samples appended."""
        return SetApprox(
            self.mu,
            self.vfuncs,
            np.vstack([self.directions, np.reshape(directions, (-1, self.dim))]),
            np.concatenate([self.h, np.ravel(h)]),
            np.vstack([self.points, np.reshape(points, (-1, self.dim))]),
            self.witnesses + list(witnesses),
            self.resolution,
        )

    def to_dict(self):
        return {
            "spec_version": 1,
            "mu": self.mu.tolist(),
            "vfuncs": [v.to_dict() for v in self.vfuncs],
            "resolution": self.resolution,
            "directions": self.directions.tolist(),
            "h": self.h.tolist(),
            "points": self.points.tolist(),
            "witnesses": [w.to_dict() for w in self.witnesses],
            "sandwich_gap": self.sandwich_gap(),
        }

    def to_csv(self):
        """Boundary table: direction components, support value, point components."""
        n = self.dim
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"lambda{i + 1}" for i in range(n)] + ["h"] + [f"v{i + 1}" for i in range(n)])
        for lam, hv, p in zip(self.directions, self.h, self.points):
            writer.writerow([repr(float(x)) for x in lam] + [repr(float(hv))] + [repr(float(x)) for x in p])
        return buf.getvalue()


def _sample(mu, vfuncs, directions, resolution):
    results = pmap(lambda lam: support_point(lam, mu, vfuncs, resolution), directions)
    dirs = np.array([check_direction(d) for d in directions])
    h = np.array([r.h for r in results])
    pts = np.array([r.point for r in results]).reshape(len(results), len(vfuncs))
    return dirs, h, pts, [r.witness for r in results]


def approximate_set(mu, vfuncs, directions=None, resolution=DEFAULT_RESOLUTION):
    """Sandwich approximation from support points in sampled directions.

    ``directions`` is either a count (default ``max(2n + 2, 16)``) or an
    explicit array of directions.
    """
    mu = check_belief(mu)
    vfuncs = list(vfuncs)
    if not vfuncs or not all(isinstance(v, ValueFunction) for v in vfuncs):
        raise ValueError("vfuncs must be a non-empty list of ValueFunction")
    n = len(vfuncs)
    if directions is None:
        directions = default_direction_count(n)
    if np.isscalar(directions):
        count = check_positive_int(directions, "directions", minimum=n + 1 if n > 1 else 2)
        directions = sample_directions(n, count)
    dirs, h, pts, wit = _sample(mu, vfuncs, np.atleast_2d(directions), resolution)
    return SetApprox(mu, vfuncs, dirs, h, pts, wit, resolution)


def _as_approx(mu_or_approx, vfuncs, directions, resolution):
    if isinstance(mu_or_approx, SetApprox):
        return mu_or_approx
    return approximate_set(mu_or_approx, vfuncs, directions, resolution)


def membership(v, mu_or_approx, vfuncs=None, directions=None, resolution=DEFAULT_RESOLUTION, tol=BOUNDARY_TOL):
    """Classify ``v`` as ``"inside"``, ``"outside"`` or ``"boundary"``.

    Outside means some sampled halfspace is violated by more than ``tol``;
    inside means ``v`` is a convex combination of inner vertices; boundary
    means it is within ``tol`` of the inner polytope.  Anything else raises
    :class:`Indeterminate`.
    """
    approx = _as_approx(mu_or_approx, vfuncs, directions, resolution)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if approx.halfspace_violation(v) > tol:
        return "outside"
    dist, _ = hull_distance(v, approx.inner_vertices)
    if dist <= 1e-9:
        return "inside"
    if dist <= tol:
        return "boundary"
    raise Indeterminate(f"point is {dist:.3g} from the inner polytope; refine directions or resolution")


def implement_point(v, mu_or_approx, vfuncs=None, directions=None, resolution=DEFAULT_RESOLUTION, tol=BOUNDARY_TOL):
    """A signal structure whose expected values equal ``v`` (within ``tol``).

    Writes ``v`` as a combination of at most ``n + 1`` inner vertices and
    mixes their witnesses, so the result has at most ``(n + 1) * n_states``
    atoms.
    """
    approx = _as_approx(mu_or_approx, vfuncs, directions, resolution)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    try:
        verdict = membership(v, approx, tol=tol)
    except Indeterminate as exc:
        raise NotInSet(str(exc)) from exc
    if verdict == "outside":
        raise NotInSet("point violates a supporting halfspace")
    verts, wits = approx.inner_vertices, approx.inner_witnesses
    exact = np.flatnonzero(np.max(np.abs(verts - v), axis=1) <= 1e-12)
    if exact.size:
        return wits[exact[0]]
    _, w = hull_distance(v, verts)
    idx = np.flatnonzero(w > 0)
    w_red, _, keep = caratheodory_reduce(w[idx] / w[idx].sum(), verts[idx], return_indices=True)
    return mix_many([wits[idx[k]] for k in keep], w_red)


def continuity_probe(mu_seq, vfuncs, directions=None, resolution=DEFAULT_RESOLUTION):
    """Hausdorff distances between inner approximations at consecutive priors."""
    approxes = [approximate_set(mu, vfuncs, directions, resolution) for mu in mu_seq]
    return [hausdorff(a.inner_vertices, b.inner_vertices) for a, b in zip(approxes, approxes[1:])]
