"""Coordinatewise order on R^d.

Vectors are plain array-likes; every predicate takes an explicit cone
tolerance ``eps`` so that numerically generated strings can be compared.
"""

import numpy as np

from .errors import InputError

__all__ = ["DEFAULT_EPS_CONE", "as_vector", "cone_leq", "is_monotone_string", "norm"]

DEFAULT_EPS_CONE = 1e-12


def as_vector(u):
    """Return ``u`` as a finite 1-D float array."""
    v = np.atleast_1d(np.asarray(u, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise InputError(f"expected a nonempty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite coordinates")
    return v


def cone_leq(u, v, eps=DEFAULT_EPS_CONE):
    """True iff ``u <= v`` coordinatewise, up to ``eps``."""
    if eps < 0:
        raise InputError("eps_cone must be nonnegative")
    u, v = as_vector(u), as_vector(v)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.size} vs {v.size}")
    return bool(np.all(v - u >= -eps))


def is_monotone_string(points, direction="decreasing", eps=DEFAULT_EPS_CONE):
    """Check that consecutive points are ordered in ``direction``.

    ``direction`` is ``"decreasing"`` (x_1 >= x_2 >= ...) or ``"increasing"``.
    """
    pts = [as_vector(p) for p in points]
    if not pts:
        raise InputError("empty string of points")
    if direction not in ("decreasing", "increasing"):
        raise InputError(f"unknown direction {direction!r}")
    for a, b in zip(pts, pts[1:]):
        ok = cone_leq(b, a, eps) if direction == "decreasing" else cone_leq(a, b, eps)
        if not ok:
            return False
    return True


def norm(u, kind="euclidean"):
    if kind == "euclidean":
        return float(np.linalg.norm(as_vector(u)))
    if kind == "sup":
        return float(np.max(np.abs(as_vector(u))))
    raise InputError(f"unknown norm {kind!r}")


def norm_rows(diff, kind="euclidean"):
    """Row-wise norm of a ``(n, d)`` array."""
    diff = np.asarray(diff, dtype=float)
    if kind == "euclidean":
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if kind == "sup":
        return np.max(np.abs(diff), axis=-1)
    raise InputError(f"unknown norm {kind!r}")
