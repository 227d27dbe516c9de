"""Persuading voters who must pay to participate.

Two states; ``mu`` denotes ``Pr(x1)``.  Voter ``i`` votes for the new policy
at posterior ``nu`` iff ``nu >= threshold_i`` and participates iff the
expected utility of the public signal covers the cost, ``E_P[F_i] >= c_i``.
The sender maximizes the probability that at least ``m`` participating
voters vote for the policy.

Against signals with posteriors ``{0, nu}`` a voter's participation value is

    r_i(nu) = ((nu - mu) / nu) F_i(0) + (mu / nu) F_i(nu) - c_i,

whose root is the voter's critical belief.  The optimal signal splits the
prior into ``0`` and the smallest ``mu*`` at which ``m`` voters both
participate and vote.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ..core import SignalStructure, ValueFunction, value_function_from_dict
from ..exceptions import InfoDesignError, NoRoot, Unpersuadable
from ..solver import Solution

ROOT_TOL = 1e-10
PARTICIPATION_TOL = 1e-9


class OracleMismatch(InfoDesignError):
    """The brute-force cross-check disagrees with the closed form."""


@dataclass(frozen=True, eq=False)
class VoterSpec:
    mu: float
    m: int
    thresholds: np.ndarray
    utilities: list
    costs: np.ndarray = None

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=float).ravel()
        n = th.size
        costs = np.zeros(n) if self.costs is None else np.asarray(self.costs, dtype=float).ravel()
        if not 0.0 < self.mu < 1.0:
            raise ValueError("prior Pr(x1) must lie in (0, 1)")
        if np.any((th <= 0) | (th >= 1)):
            raise ValueError("vote thresholds must lie in (0, 1)")
        if len(self.utilities) != n or costs.size != n:
            raise ValueError("one utility and one cost per voter")
        if not all(isinstance(f, ValueFunction) for f in self.utilities):
            raise ValueError("utilities must be ValueFunction instances")
        if np.any(costs < 0):
            raise ValueError("participation costs must be nonnegative")
        if not 1 <= int(self.m) <= n:
            raise ValueError("m must be between 1 and the number of voters")
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "m", int(self.m))

    @property
    def n_voters(self):
        return self.thresholds.size

    def utility(self, i, p):
        """``F_i`` at ``Pr(x1) = p`` (vectorized over ``p``)."""
        p = np.asarray(p, dtype=float)
        return self.utilities[i](np.stack([1.0 - p, p], axis=-1))

    def participation_value(self, i, nu):
        """``r_i(nu)``; at ``nu = mu`` this is ``F_i(mu) - c_i``."""
        nu = np.asarray(nu, dtype=float)
        w = self.mu / nu
        return (1.0 - w) * self.utility(i, 0.0) + w * self.utility(i, nu) - self.costs[i]

    def to_dict(self):
        return {
            "spec_version": 1,
            "mu": self.mu,
            "m": self.m,
            "thresholds": self.thresholds.tolist(),
            "utilities": [f.to_dict() for f in self.utilities],
            "costs": self.costs.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            float(data["mu"]),
            int(data["m"]),
            data["thresholds"],
            [value_function_from_dict(f) for f in data["utilities"]],
            data.get("costs"),
        )


def _roots(fn, lo, hi, samples=2001):
    xs = np.linspace(lo, hi, samples)
    ys = fn(xs)
    out = [float(x) for x, y in zip(xs, ys) if y == 0.0]
    for a, b, ya, yb in zip(xs[:-1], xs[1:], ys[:-1], ys[1:]):
        if ya * yb < 0:
            out.append(brentq(fn, a, b, xtol=1e-14, rtol=1e-15))
    return sorted(out)


def critical_belief(i, spec):
    """Root of ``r_i`` on ``(mu, 1]``.

    Returns ``mu`` when ``r_i(mu) = 0`` and ``1.0`` when ``r_i >= 0``
    everywhere on the interval (participation is free).  When several roots
    exist the smallest is returned.

    Raises
    ------
    NoRoot
        If ``r_i < 0`` on the whole interval.
    """
    mu = spec.mu

    def r(x):
        return spec.participation_value(i, x)

    if abs(r(mu)) <= 1e-12:
        return mu
    roots = [x for x in _roots(r, mu + 1e-12, 1.0) if abs(r(x)) <= ROOT_TOL]
    if roots:
        return roots[0]
    xs = np.linspace(mu, 1.0, 2001)
    if np.all(r(xs) >= 0):
        return 1.0
    raise NoRoot(f"voter {i}: participation value has no root on (mu, 1]")


def _participants(spec, nu):
    """Voters who participate under ``{0, nu}`` (``delta_mu`` when ``nu == mu``)."""
    return np.array([spec.participation_value(i, nu) >= -PARTICIPATION_TOL for i in range(spec.n_voters)])


def _success(spec, nu):
    part = _participants(spec, nu)
    vote = nu >= spec.thresholds - 1e-12
    return int(np.sum(part & vote)) >= spec.m, part, vote


def candidate_beliefs(spec):
    """Posteriors where the count of participating supporters can increase."""
    mu = spec.mu
    cands = {mu, 1.0}
    cands.update(float(t) for t in spec.thresholds if t >= mu)
    for i in range(spec.n_voters):
        cands.update(_roots(lambda x, i=i: spec.participation_value(i, x), mu + 1e-12, 1.0))
    return sorted(c for c in cands if mu <= c <= 1.0)


class VoterOutcome(NamedTuple):
    solution: Solution
    selected: list
    mu_star: float


def brute_force(spec, resolution=200, extra=()):
    """Best success probability over all two-point signals on a grid.

    Every voter whose participation constraint holds is counted, since
    adding participants never lowers the number of supporters.  Returns
    ``(value, (low, high, weight_high))``.
    """
    mu = spec.mu
    grid = np.unique(np.concatenate([np.arange(resolution + 1) / resolution, np.asarray(extra, float), [mu]]))
    F = np.array([spec.utility(i, grid) for i in range(spec.n_voters)])
    c, th = spec.costs[:, None], spec.thresholds[:, None]
    # no information
    k = int(np.flatnonzero(grid == mu)[0])
    ok = np.sum((F[:, k:k + 1] >= c - PARTICIPATION_TOL) & (mu >= th - 1e-12)) >= spec.m
    best, arg = float(ok), (mu, mu, 1.0)
    above = np.flatnonzero(grid > mu)
    for a in np.flatnonzero(grid < mu):
        wb = (mu - grid[a]) / (grid[above] - grid[a])
        ef = (1.0 - wb) * F[:, a:a + 1] + wb * F[:, above]
        part = ef >= c - PARTICIPATION_TOL
        succ_a = np.sum(part & (grid[a] >= th - 1e-12), axis=0) >= spec.m
        succ_b = np.sum(part & (grid[above][None, :] >= th - 1e-12), axis=0) >= spec.m
        val = (1.0 - wb) * succ_a + wb * succ_b
        j = int(np.argmax(val))
        if val[j] > best + 1e-15:
            best, arg = float(val[j]), (float(grid[a]), float(grid[above][j]), float(wb[j]))
    return best, arg


def voters_solve(spec, validate=True, oracle_resolution=200):
    """Optimal public signal for the voting game.

    Returns ``VoterOutcome(solution, selected, mu_star)``.  ``selected`` lists
    the voters who participate and vote for the policy at ``mu_star``.  With
    ``validate`` the result is checked against :func:`brute_force` on a grid
    (plus the candidate beliefs); a disagreement beyond ``1e-6`` raises
    :class:`OracleMismatch`.

    Raises
    ------
    Unpersuadable
        If no posterior makes ``m`` voters participate and vote.
    """
    mu = spec.mu
    cands = candidate_beliefs(spec)
    mu_star = None
    for c in cands:
        ok, part, vote = _success(spec, c)
        if ok:
            mu_star = c
            break
    if mu_star is None:
        raise Unpersuadable("no posterior makes m voters participate and vote")
    if mu_star <= mu:
        P = SignalStructure.delta([1.0 - mu, mu])
        value = 1.0
    else:
        value = float(mu / mu_star)
        P = SignalStructure([1.0 - value, value], [[1.0, 0.0], [1.0 - mu_star, mu_star]])
    selected = [int(i) for i in np.flatnonzero(part & vote)]
    ev = [P.expectation(f) for f in spec.utilities]
    diag = {"mu_star": mu_star, "participating": [int(i) for i in np.flatnonzero(part)], "candidates": len(cands)}
    if validate:
        oracle, _ = brute_force(spec, oracle_resolution, extra=cands)
        diag["oracle_value"] = oracle
        if abs(oracle - value) > 1e-6:
            raise OracleMismatch(f"closed form {value:.9g} vs brute force {oracle:.9g}")
    sol = Solution(value, np.array([value] + ev), P, None, diag)
    return VoterOutcome(sol, selected, float(mu_star))
