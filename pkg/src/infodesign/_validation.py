"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np

#: Entries below this are treated as corrupt rather than rounding noise.
NEGATIVE_TOL = 1e-9


def check_belief(mu, n_states=None, name="belief"):
    """Return ``mu`` as a float vector on the probability simplex.

    Small negative entries (above ``-1e-9``) are clipped, and the vector is
    renormalized to sum to one.
    """
    arr = np.asarray(mu, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d array, got shape {arr.shape}")
    if n_states is not None and arr.size != n_states:
        raise ValueError(f"{name} has {arr.size} states, expected {n_states}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if arr.min() < -NEGATIVE_TOL:
        raise ValueError(f"{name} has negative entry {arr.min():.3g}")
    arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    if total <= 0:
        raise ValueError(f"{name} has zero total mass")
    return arr / total


def check_beliefs(X, n_states=None, name="beliefs"):
    """Row-wise :func:`check_belief` for a 2-d array of beliefs."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {arr.shape}")
    if n_states is not None and arr.shape[1] != n_states:
        raise ValueError(f"{name} has {arr.shape[1]} states, expected {n_states}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if arr.min() < -NEGATIVE_TOL:
        raise ValueError(f"{name} has negative entries")
    arr = np.clip(arr, 0.0, None)
    totals = arr.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError(f"{name} has a row with zero mass")
    return arr / totals


def binary_belief(p):
    """Belief on two states with ``Pr(x1) = p``."""
    p = float(p)
    if not -NEGATIVE_TOL <= p <= 1 + NEGATIVE_TOL:
        raise ValueError(f"probability {p} outside [0, 1]")
    p = min(max(p, 0.0), 1.0)
    return np.array([1.0 - p, p])


def check_direction(lam, dim=None):
    """Return ``lam`` normalized to the unit sphere."""
    arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if arr.ndim != 1:
        raise ValueError("direction must be 1-d")
    if dim is not None and arr.size != dim:
        raise ValueError(f"direction has length {arr.size}, expected {dim}")
    norm = np.linalg.norm(arr)
    if not np.isfinite(norm) or norm == 0:
        raise ValueError("direction must be finite and nonzero")
    return arr / norm


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
