"""Dense revised simplex with Bland's rule.

The concavification LPs have a handful of equality rows and at most a few
thousand columns, so a dense basis solve per pivot is cheap.  Bland's
smallest-index rule is used for both entering and leaving variables, which
guarantees termination on degenerate problems.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleProblem, NumericalRankFailure


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    basis: np.ndarray
    iterations: int
    degenerate: bool

    @property
    def status(self):
        return "degenerate-resolved" if self.degenerate else "optimal"


class Unbounded(NumericalRankFailure):
    pass


def _pivot_loop(c, A, b, basis, tol, max_iter):
    m = A.shape[0]
    basis = np.array(basis, dtype=np.int64)
    degenerate = False
    scale = max(1.0, float(np.abs(c).max()))
    for it in range(max_iter):
        B = A[:, basis]
        xB = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, c[basis])
        reduced = c - y @ A
        reduced[basis] = 0.0
        entering = np.flatnonzero(reduced > tol * scale)
        if entering.size == 0:
            return basis, np.clip(xB, 0.0, None), it, degenerate
        q = entering[0]
        d = np.linalg.solve(B, A[:, q])
        rows = np.flatnonzero(d > 1e-11)
        if rows.size == 0:
            raise Unbounded("LP is unbounded")
        ratios = np.clip(xB[rows], 0.0, None) / d[rows]
        theta = ratios.min()
        ties = rows[ratios <= theta + 1e-13]
        leave = ties[np.argmin(basis[ties])]
        if theta <= 1e-13:
            degenerate = True
        basis[leave] = q
    raise NumericalRankFailure(f"simplex did not terminate in {max_iter} pivots ({m} rows)")


def solve_lp(c, A_eq, b_eq, A_ub=None, b_ub=None, basis=None, tol=1e-11, max_iter=None):
    """Maximize ``c @ x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub``, ``x >= 0``.

    If ``basis`` is given it must index a feasible basis of the equality
    system (no inequality rows allowed then) and phase one is skipped.

    Raises :class:`InfeasibleProblem` when the constraints admit no solution.
    """
    c = np.asarray(c, dtype=float)
    A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.asarray(b_eq, dtype=float).ravel()
    n = c.size
    if A_ub is not None and len(A_ub):
        A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
        b_ub = np.asarray(b_ub, dtype=float).ravel()
        k = A_ub.shape[0]
        A = np.block([[A_eq, np.zeros((A_eq.shape[0], k))], [A_ub, np.eye(k)]])
        b = np.concatenate([b_eq, b_ub])
        cc = np.concatenate([c, np.zeros(k)])
    else:
        A, b, cc = A_eq, b_eq, c
    m, N = A.shape
    if max_iter is None:
        max_iter = 50 * (m + N) + 100

    if basis is not None:
        if A is not A_eq:
            raise ValueError("warm start is only supported without inequality rows")
        basis, xB, it, degenerate = _pivot_loop(cc, A, b, basis, tol, max_iter)
        x = np.zeros(N)
        x[basis] = xB
        return LPResult(x[:n], float(c @ x[:n]), basis, it, degenerate)

    # phase one: artificial basis on sign-normalized rows
    sign = np.where(b < 0, -1.0, 1.0)
    A1 = np.hstack([A * sign[:, None], np.eye(m)])
    b1 = b * sign
    c1 = np.concatenate([np.zeros(N), -np.ones(m)])
    basis, xB, it1, deg1 = _pivot_loop(c1, A1, b1, np.arange(N, N + m), tol, max_iter)
    infeas = float(xB[basis >= N].sum())
    if infeas > 1e-9 * max(1.0, float(np.abs(b1).max())):
        raise InfeasibleProblem(f"LP infeasible (phase-one residual {infeas:.3g})")

    # drive zero-level artificials out of the basis; drop redundant rows
    keep_rows = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < N:
            continue
        B = A1[:, basis]
        row = np.linalg.solve(B.T, np.eye(m)[r]) @ A1[:, :N]
        row[basis[basis < N]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-9)
        if cand.size:
            basis[r] = cand[0]
        else:
            keep_rows[r] = False
    A2, b2 = A1[keep_rows, :N], b1[keep_rows]
    basis = basis[keep_rows]
    basis, xB, it2, deg2 = _pivot_loop(cc, A2, b2, basis, tol, max_iter)
    x = np.zeros(N)
    x[basis] = xB
    return LPResult(x[:n], float(c @ x[:n]), basis, it1 + it2, deg1 or deg2)
