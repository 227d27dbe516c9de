"""Small convex-geometry toolkit: directions, hull projection, polytopes."""

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import HalfspaceIntersection
from scipy.stats import norm as _normal

from ._validation import check_positive_int


def _kronecker(count, dim):
    # Roberts' generalized golden-ratio sequence
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    alpha = (1.0 / phi) ** np.arange(1, dim + 1)
    i = np.arange(1, count + 1)[:, None]
    return (0.5 + i * alpha) % 1.0


def sample_directions(dim, count):
    """Deterministic unit directions in R^dim.

    ``dim == 1`` gives ``+1, -1``; ``dim == 2`` gives ``count`` equally spaced
    angles starting at zero; higher dimensions give the ``2 * dim`` signed
    axes followed by a golden-ratio low-discrepancy sequence pushed onto the
    sphere.  For ``dim != 2`` every sample is a prefix of any larger sample.
    """
    dim = check_positive_int(dim, "dim")
    count = check_positive_int(count, "count")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(count) / count
        out = np.column_stack([np.cos(theta), np.sin(theta)])
        out[np.abs(out) < 1e-15] = 0.0
        return out
    axes = np.vstack([np.eye(dim), -np.eye(dim)])
    if count <= 2 * dim:
        return axes[:count]
    g = _normal.ppf(_kronecker(count - 2 * dim, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack([axes, g])


def min_norm_point(points, tol=1e-12, max_iter=1000):
    """Point of minimum Euclidean norm in the convex hull of ``points``.

    Wolfe's algorithm.  Returns ``(x, weights)`` with ``weights @ points = x``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    k = P.shape[0]
    scale = max(1.0, float((P * P).sum(axis=1).max()))
    j = int(np.argmin((P * P).sum(axis=1)))
    S = [j]
    lam = np.array([1.0])
    x = P[j].copy()
    for _ in range(max_iter):
        dots = P @ x
        j = int(np.argmin(dots))
        if x @ x - dots[j] <= tol * scale or j in S:
            break
        S.append(j)
        lam = np.append(lam, 0.0)
        while True:
            Q = P[S]
            ns = len(S)
            M = np.zeros((ns + 1, ns + 1))
            M[:ns, :ns] = Q @ Q.T
            M[:ns, ns] = 1.0
            M[ns, :ns] = 1.0
            rhs = np.zeros(ns + 1)
            rhs[ns] = 1.0
            a = np.linalg.lstsq(M, rhs, rcond=None)[0][:ns]
            if np.all(a > 1e-14):
                lam = a
                break
            mask = a <= 1e-14
            theta = np.min(lam[mask] / (lam[mask] - a[mask]))
            lam = theta * a + (1.0 - theta) * lam
            lam[lam < 1e-14] = 0.0
            keep = lam > 0
            S = [s for s, kflag in zip(S, keep) if kflag]
            lam = lam[keep]
            lam /= lam.sum()
        x = lam @ P[S]
    weights = np.zeros(k)
    weights[S] = lam
    return x, weights


def hull_distance(x, vertices):
    """Distance from ``x`` to ``conv(vertices)`` and convex weights of the nearest point."""
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    x = np.asarray(x, dtype=float)
    if V.shape[1] == 1:
        lo, hi = V[:, 0].min(), V[:, 0].max()
        y = min(max(x[0], lo), hi)
        w = np.zeros(V.shape[0])
        i_lo, i_hi = int(np.argmin(V[:, 0])), int(np.argmax(V[:, 0]))
        if hi - lo <= 0:
            w[i_lo] = 1.0
        else:
            t = (y - lo) / (hi - lo)
            w[i_lo] += 1.0 - t
            w[i_hi] += t
        return abs(x[0] - y), w
    y, w = min_norm_point(V - x)
    return float(np.linalg.norm(y)), w


def hausdorff(A, B):
    """Hausdorff distance between ``conv(A)`` and ``conv(B)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    da = max(hull_distance(a, B)[0] for a in A)
    db = max(hull_distance(b, A)[0] for b in B)
    return max(da, db)


def _clip_polygon(poly, a, b, tol=0.0):
    """Sutherland-Hodgman clip of a polygon by the halfplane ``a @ x <= b + tol``."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp, fq = a @ p - b, a @ q - b
        p_in, q_in = fp <= tol, fq <= tol
        if p_in:
            out.append(p)
        if p_in != q_in:
            t = min(max(fp / (fp - fq), 0.0), 1.0)
            out.append(p + t * (q - p))
    return out


def halfspace_vertices(normals, offsets, box=None):
    """Vertices of ``{x : normals @ x <= offsets}`` (intersected with a box).

    The box (default: generous multiple of the offsets) keeps the result
    finite when the halfspaces do not positively span the space.
    """
    N = np.atleast_2d(np.asarray(normals, dtype=float))
    h = np.asarray(offsets, dtype=float).ravel()
    dim = N.shape[1]
    if box is None:
        box = 1e3 * (1.0 + float(np.abs(h).max()))
    if dim == 1:
        up = [h[i] / N[i, 0] for i in range(len(h)) if N[i, 0] > 0]
        lo = [h[i] / N[i, 0] for i in range(len(h)) if N[i, 0] < 0]
        hi_v = min(up) if up else box
        lo_v = max(lo) if lo else -box
        if lo_v > hi_v + 1e-12:
            return np.empty((0, 1))
        return np.array([[lo_v], [max(hi_v, lo_v)]])
    if dim == 2:
        poly = [np.array(p, dtype=float) for p in ([-box, -box], [box, -box], [box, box], [-box, box])]
        # relative tolerance so halfspaces through a common point cannot clip it away by rounding
        for a, b in zip(N, h):
            poly = _clip_polygon(poly, a, b, 1e-12 * (1.0 + abs(b)))
            if not poly:
                return np.empty((0, 2))
        return _dedupe(np.array(poly))
    A = np.vstack([N, np.eye(dim), -np.eye(dim)])
    b = np.concatenate([h, np.full(2 * dim, box)])
    norms = np.linalg.norm(A, axis=1)
    res = linprog(
        np.r_[np.zeros(dim), -1.0],
        A_ub=np.column_stack([A, norms]),
        b_ub=b,
        bounds=[(None, None)] * dim + [(0, None)],
        method="highs",
    )
    if res.status != 0:
        return np.empty((0, dim))
    center, radius = res.x[:dim], res.x[dim]
    if radius < 1e-9:
        # flat polytope: thicken slightly so the intersection is computable
        b = b + 1e-8
        res = linprog(
            np.r_[np.zeros(dim), -1.0],
            A_ub=np.column_stack([A, norms]),
            b_ub=b,
            bounds=[(None, None)] * dim + [(0, None)],
            method="highs",
        )
        center = res.x[:dim]
    hs = HalfspaceIntersection(np.column_stack([A, -b]), center)
    return _dedupe(hs.intersections)


def _dedupe(points, tol=1e-12):
    out = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= tol for q in out):
            out.append(p)
    return np.array(out)


def affine_basis(points, tol=1e-9):
    """Origin and orthonormal basis of the affine hull of ``points``."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    origin = P.mean(axis=0)
    if P.shape[0] == 1:
        return origin, np.zeros((0, P.shape[1]))
    _, s, vt = np.linalg.svd(P - origin, full_matrices=False)
    scale = max(1.0, float(s[0])) if s.size else 1.0
    rank = int(np.sum(s > tol * scale))
    return origin, vt[:rank]
