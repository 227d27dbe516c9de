"""Beliefs, signal structures, value functions and simplex grids.

Everything here is immutable once constructed.  Beliefs are dense numpy
vectors; a :class:`SignalStructure` is a finite list of (weight, posterior)
atoms and is the computational stand-in for a distribution over posteriors.
Entropy uses the natural logarithm.
"""

from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import entr

from ._validation import check_belief, check_beliefs

#: Posteriors closer than this (max-abs) are merged into one atom.
MERGE_TOL = 1e-10
#: Threshold comparisons for indicator value functions.
THRESHOLD_TOL = 1e-12


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Belief:
    """A probability vector over a finite state set."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(check_belief(self.probs)))

    @classmethod
    def binary(cls, p):
        """Two-state belief with ``Pr(x1) = p``."""
        return cls([1.0 - p, p])

    @property
    def n_states(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)

    def __len__(self):
        return self.probs.size

    def __eq__(self, other):
        other = other.probs if isinstance(other, Belief) else np.asarray(other, float)
        return other.shape == self.probs.shape and bool(np.allclose(self.probs, other, atol=1e-12, rtol=0))

    def __hash__(self):
        return hash(tuple(np.round(self.probs, 12)))

    def __repr__(self):
        return f"Belief({np.array2string(self.probs, precision=6)})"


@dataclass(frozen=True, eq=False)
class SignalStructure:
    """Finite-support distribution over posterior beliefs.

    Atoms with weight zero are dropped and posteriors within ``MERGE_TOL`` of
    each other are merged (weights added).  Atoms are stored in lexicographic
    order of their posteriors so equal structures have equal layouts.
    """

    weights: np.ndarray
    posteriors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        post = np.asarray(self.posteriors, dtype=float)
        if post.ndim == 1:
            post = post[None, :]
        if post.shape[0] != w.size:
            raise ValueError(f"{w.size} weights but {post.shape[0]} posteriors")
        if w.size == 0:
            raise ValueError("a signal structure needs at least one atom")
        if not np.all(np.isfinite(w)) or w.min() < -1e-9:
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if abs(total - 1.0) > 1e-8:
            raise ValueError(f"weights sum to {total!r}, not 1")
        post = check_beliefs(post, name="posteriors")
        keep = w > 1e-15
        w, post = w[keep] / w[keep].sum(), post[keep]
        w, post = _merge_atoms(w, post)
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "posteriors", _frozen(post))

    @classmethod
    def delta(cls, mu):
        """The uninformative structure: all mass on the prior."""
        return cls([1.0], [np.asarray(mu, dtype=float)])

    @classmethod
    def from_atoms(cls, atoms):
        """Build from an iterable of ``(weight, posterior)`` pairs."""
        atoms = list(atoms)
        return cls([a[0] for a in atoms], [np.asarray(a[1], dtype=float) for a in atoms])

    @property
    def n_states(self):
        return self.posteriors.shape[1]

    @property
    def support_size(self):
        return self.weights.size

    def __len__(self):
        return self.weights.size

    def __iter__(self):
        return iter(zip(self.weights.tolist(), list(self.posteriors)))

    def barycenter(self):
        return self.weights @ self.posteriors

    def expectation(self, vf):
        return float(self.weights @ vf(self.posteriors))

    def information(self, mu=None):
        """Expected entropy reduction ``E[H(mu) - H(nu)]``."""
        mu = self.barycenter() if mu is None else np.asarray(mu, float)
        return float(entr(mu).sum() - self.weights @ entr(self.posteriors).sum(axis=1))

    def to_dict(self):
        return {"weights": self.weights.tolist(), "posteriors": self.posteriors.tolist()}

    @classmethod
    def from_dict(cls, data):
        return cls(data["weights"], data["posteriors"])

    def __repr__(self):
        atoms = ", ".join(
            f"({w:.4g}, {np.array2string(p, precision=4)})" for w, p in zip(self.weights, self.posteriors)
        )
        return f"SignalStructure([{atoms}])"


def _merge_atoms(w, post):
    order = np.lexsort(post.T[::-1])
    w, post = w[order], post[order]
    kept_w, kept_p = [], []
    for wi, pi in zip(w, post):
        for j, pj in enumerate(kept_p):
            if np.max(np.abs(pj - pi)) <= MERGE_TOL:
                total = kept_w[j] + wi
                kept_p[j] = (kept_w[j] * pj + wi * pi) / total
                kept_w[j] = total
                break
        else:
            kept_w.append(wi)
            kept_p.append(pi)
    return np.array(kept_w), np.array(kept_p)


def barycenter(P):
    """Mean posterior ``sum_t p_t nu_t`` of a signal structure."""
    return P.barycenter()


def expected_values(P, vfuncs):
    """Vector ``(E_P[V^1], ..., E_P[V^n])``."""
    vfuncs = list(vfuncs)
    if not vfuncs:
        raise ValueError("need at least one value function")
    return np.array([P.expectation(v) for v in vfuncs])


def mix(P1, P2, beta):
    """Convex combination ``beta * P1 + (1 - beta) * P2`` of two structures."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"mixing weight {beta} outside [0, 1]")
    if P1.n_states != P2.n_states:
        raise ValueError("structures live on different state spaces")
    w = np.concatenate([beta * P1.weights, (1.0 - beta) * P2.weights])
    post = np.vstack([P1.posteriors, P2.posteriors])
    return SignalStructure(w, post)


def mix_many(structures, weights):
    """Convex combination of several structures."""
    weights = np.asarray(weights, dtype=float)
    w = np.concatenate([pi * P.weights for pi, P in zip(weights, structures)])
    post = np.vstack([P.posteriors for P in structures])
    return SignalStructure(w, post)


# ---------------------------------------------------------------- value functions


class ValueFunction:
    """A function on the belief simplex.

    Calling an instance on a 1-d belief returns a float; on a 2-d array of
    beliefs (one per row) it returns a vector.
    """

    kind = None

    def __init__(self, label=None):
        self.label = label if label is not None else self.kind

    def __call__(self, beliefs):
        arr = np.asarray(beliefs, dtype=float)
        if arr.ndim == 1:
            return float(self._evaluate(arr[None, :])[0])
        return self._evaluate(arr)

    def _evaluate(self, beliefs):
        raise NotImplementedError

    def critical_points(self, n_states):
        """Extra posteriors worth adding to a discretization (kinks, jumps).

        Only two-state kinks are reported; the default is none.
        """
        return np.empty((0, n_states))

    def is_concave(self):
        return False

    def to_dict(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(label={self.label!r})"


class DecisionUtility(ValueFunction):
    """``F(mu) = max_a E_mu[u(a, x)]`` for a payoff matrix of shape (actions, states)."""

    kind = "decision"

    def __init__(self, payoffs, label=None):
        super().__init__(label)
        self.payoffs = np.atleast_2d(np.asarray(payoffs, dtype=float))

    def _evaluate(self, beliefs):
        return (beliefs @ self.payoffs.T).max(axis=1)

    def critical_points(self, n_states):
        if n_states != 2:
            return np.empty((0, n_states))
        slopes = self.payoffs[:, 1] - self.payoffs[:, 0]
        pts = []
        for a in range(len(slopes)):
            for b in range(a + 1, len(slopes)):
                ds = slopes[a] - slopes[b]
                if abs(ds) > 1e-15:
                    p = (self.payoffs[b, 0] - self.payoffs[a, 0]) / ds
                    if 0.0 < p < 1.0:
                        pts.append([1.0 - p, p])
        return np.array(pts).reshape(-1, 2)

    def to_dict(self):
        return {"kind": self.kind, "payoffs": self.payoffs.tolist(), "label": self.label}


class Entropy(ValueFunction):
    """Shannon entropy ``-sum mu_x ln mu_x`` with ``0 ln 0 = 0``."""

    kind = "entropy"

    def _evaluate(self, beliefs):
        return entr(beliefs).sum(axis=1)

    def is_concave(self):
        return True

    def to_dict(self):
        return {"kind": self.kind, "label": self.label}


class Indicator(ValueFunction):
    """``1`` where the belief in state ``coordinate`` is at least ``threshold``."""

    kind = "indicator"

    def __init__(self, threshold, coordinate=1, label=None):
        super().__init__(label)
        self.threshold = float(threshold)
        self.coordinate = int(coordinate)

    def _evaluate(self, beliefs):
        return (beliefs[:, self.coordinate] >= self.threshold - THRESHOLD_TOL).astype(float)

    def critical_points(self, n_states):
        if n_states != 2 or not 0.0 < self.threshold < 1.0:
            return np.empty((0, n_states))
        p = self.threshold if self.coordinate == 1 else 1.0 - self.threshold
        return np.array([[1.0 - p, p]])

    def to_dict(self):
        return {"kind": self.kind, "threshold": self.threshold, "coordinate": self.coordinate, "label": self.label}


class PiecewiseLinear(ValueFunction):
    """Linear interpolation of ``values`` at ``breakpoints`` of one coordinate."""

    kind = "pwl"

    def __init__(self, breakpoints, values, coordinate=1, label=None):
        super().__init__(label)
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.coordinate = int(coordinate)
        if self.breakpoints.shape != self.values.shape or self.breakpoints.ndim != 1:
            raise ValueError("breakpoints and values must be 1-d arrays of equal length")
        if self.breakpoints.size < 2 or np.any(np.diff(self.breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing with at least two entries")

    def _evaluate(self, beliefs):
        return np.interp(beliefs[:, self.coordinate], self.breakpoints, self.values)

    def critical_points(self, n_states):
        if n_states != 2:
            return np.empty((0, n_states))
        p = self.breakpoints[(self.breakpoints > 0) & (self.breakpoints < 1)]
        if self.coordinate == 0:
            p = 1.0 - p
        return np.column_stack([1.0 - p, p])

    def is_concave(self):
        slopes = np.diff(self.values) / np.diff(self.breakpoints)
        return bool(np.all(np.diff(slopes) <= 1e-12))

    def to_dict(self):
        return {
            "kind": self.kind,
            "breakpoints": self.breakpoints.tolist(),
            "values": self.values.tolist(),
            "coordinate": self.coordinate,
            "label": self.label,
        }


class Tabulated(ValueFunction):
    """Values on a :class:`SimplexGrid`, interpolated barycentrically."""

    kind = "table"

    def __init__(self, grid, values, label=None):
        super().__init__(label)
        self.grid = grid
        self.values = _frozen(values)
        if self.values.shape != (len(grid),):
            raise ValueError(f"expected {len(grid)} table values, got {self.values.shape}")

    def _evaluate(self, beliefs):
        return self.grid.interpolate(self.values, beliefs)

    def to_dict(self):
        return {
            "kind": self.kind,
            "n_states": self.grid.n_states,
            "resolution": self.grid.resolution,
            "values": self.values.tolist(),
            "label": self.label,
        }


class LinearCombination(ValueFunction):
    """``sum_i coef_i V^i + offset``."""

    kind = "combination"

    def __init__(self, coefs, funcs, offset=0.0, label=None):
        super().__init__(label)
        self.coefs = np.asarray(coefs, dtype=float)
        self.funcs = list(funcs)
        self.offset = float(offset)
        if self.coefs.size != len(self.funcs):
            raise ValueError("one coefficient per function")

    def _evaluate(self, beliefs):
        out = np.full(beliefs.shape[0], self.offset)
        for c, f in zip(self.coefs, self.funcs):
            if c != 0.0:
                out += c * f(beliefs)
        return out

    def critical_points(self, n_states):
        pts = [f.critical_points(n_states) for c, f in zip(self.coefs, self.funcs) if c != 0.0]
        return np.vstack(pts) if pts else np.empty((0, n_states))

    def is_concave(self):
        return all(c == 0.0 or (c > 0 and f.is_concave()) for c, f in zip(self.coefs, self.funcs))

    def to_dict(self):
        return {
            "kind": self.kind,
            "coefs": self.coefs.tolist(),
            "funcs": [f.to_dict() for f in self.funcs],
            "offset": self.offset,
            "label": self.label,
        }


def value_function_from_dict(data):
    """Inverse of ``ValueFunction.to_dict``."""
    data = dict(data)
    kind = data.pop("kind")
    label = data.pop("label", None)
    if kind == "decision":
        return DecisionUtility(data["payoffs"], label=label)
    if kind == "entropy":
        return Entropy(label=label)
    if kind == "indicator":
        return Indicator(data["threshold"], data.get("coordinate", 1), label=label)
    if kind == "pwl":
        return PiecewiseLinear(data["breakpoints"], data["values"], data.get("coordinate", 1), label=label)
    if kind == "table":
        grid = SimplexGrid(data["n_states"], data["resolution"])
        return Tabulated(grid, data["values"], label=label)
    if kind == "combination":
        funcs = [value_function_from_dict(f) for f in data["funcs"]]
        return LinearCombination(data["coefs"], funcs, data.get("offset", 0.0), label=label)
    raise ValueError(f"unknown value function kind {kind!r}")


# ---------------------------------------------------------------- grids


def _compositions(total, parts):
    """All nonnegative integer vectors of length ``parts`` summing to ``total``.

    Rows are ordered lexicographically by decreasing first entry, so for two
    states row ``k`` is ``(total - k, k)``.
    """
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    blocks = []
    for first in range(total, -1, -1):
        rest = _compositions(total - first, parts - 1)
        blocks.append(np.column_stack([np.full(len(rest), first), rest]))
    return np.vstack(blocks)


@dataclass(frozen=True, eq=False)
class SimplexGrid:
    """All beliefs whose coordinates are integer multiples of ``1/resolution``."""

    n_states: int
    resolution: int
    counts: np.ndarray = field(init=False, repr=False)
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_states < 1 or self.resolution < 1:
            raise ValueError("grid needs n_states >= 1 and resolution >= 1")
        counts = _compositions(self.resolution, self.n_states)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "points", _frozen(counts / self.resolution))
        keys = self._keys(self._tails(counts))
        order = np.argsort(keys)
        object.__setattr__(self, "_sorted_keys", keys[order])
        object.__setattr__(self, "_sorted_index", order)

    @staticmethod
    def expected_size(n_states, resolution):
        return comb(resolution + n_states - 1, n_states - 1)

    def __len__(self):
        return self.points.shape[0]

    @property
    def vertex_indices(self):
        return np.array([self.index_of(self.resolution * np.eye(self.n_states)[i]) for i in range(self.n_states)])

    def _tails(self, counts):
        # u_i = sum_{j >= i} c_j for i = 1..K-1
        return np.cumsum(counts[:, ::-1], axis=1)[:, ::-1][:, 1:]

    def _keys(self, tails):
        radix = (self.resolution + 2) ** np.arange(tails.shape[1], dtype=np.int64)
        return (tails.astype(np.int64) * radix).sum(axis=1)

    def index_of(self, counts):
        """Row index of an integer count vector (or array of them)."""
        counts = np.atleast_2d(np.asarray(counts, dtype=np.int64))
        keys = self._keys(self._tails(counts))
        pos = np.searchsorted(self._sorted_keys, keys)
        pos = np.minimum(pos, len(self._sorted_keys) - 1)
        if np.any(self._sorted_keys[pos] != keys) or np.any(counts.sum(axis=1) != self.resolution):
            raise KeyError("count vector not on this grid")
        idx = self._sorted_index[pos]
        return idx if idx.size > 1 else int(idx[0])

    def barycentric(self, beliefs):
        """Vertex indices and weights of the grid simplex containing each belief.

        Uses the Kuhn (Freudenthal) triangulation in cumulative coordinates.
        Returns arrays of shape ``(m, n_states)``.
        """
        beliefs = check_beliefs(beliefs, self.n_states)
        m, K, d = beliefs.shape[0], self.n_states, self.resolution
        if K == 1:
            return np.zeros((m, 1), dtype=np.int64), np.ones((m, 1))
        u = d * np.cumsum(beliefs[:, ::-1], axis=1)[:, ::-1][:, 1:]
        near = np.round(u)
        u = np.where(np.abs(u - near) < 1e-9, near, u)
        base = np.minimum(np.floor(u), d)
        frac = u - base
        order = np.argsort(-frac, axis=1, kind="stable")
        sfrac = np.take_along_axis(frac, order, axis=1)
        weights = np.empty((m, K))
        weights[:, 0] = 1.0 - sfrac[:, 0]
        weights[:, 1:-1] = sfrac[:, :-1] - sfrac[:, 1:]
        weights[:, -1] = sfrac[:, -1]
        verts = np.empty((m, K), dtype=np.int64)
        cur = base.astype(np.int64)
        rows = np.arange(m)
        for k in range(K):
            if k > 0:
                cur = cur.copy()
                cur[rows, order[:, k - 1]] += 1
            # zero-weight corners may leave the grid; park them on the base corner
            valid = (cur[:, 0] <= d) & np.all(cur[:, :-1] >= cur[:, 1:], axis=1) & (cur[:, -1] >= 0)
            use = np.where(valid[:, None] & (weights[:, k : k + 1] > 0), cur, base.astype(np.int64))
            counts = np.column_stack([d - use[:, 0], use[:, :-1] - use[:, 1:], use[:, -1]])
            verts[:, k] = np.atleast_1d(self.index_of(counts))
        weights[weights < 0] = 0.0
        return verts, weights

    def interpolate(self, values, beliefs):
        values = np.asarray(values, dtype=float)
        verts, weights = self.barycentric(beliefs)
        return (values[verts] * weights).sum(axis=1)

    def contains(self, other):
        """True when every point of ``other`` is a point of this grid."""
        if other.n_states != self.n_states or self.resolution % other.resolution:
            return False
        try:
            self.index_of(other.counts * (self.resolution // other.resolution))
        except KeyError:
            return False
        return True
