"""Discrete probability measures and m-parametrized majorization relations.

Both measures share the weight vector ``lam``.  With prefix slacks

    S_n = sum_{k<=n} lam_k (m y_k - x_k),

the relations are

* ``wmL_down``: x_1 >= ... >= x_N and S_n >= 0 for every n;
* ``mL_down``:  additionally S_N = 0;
* ``wmR_up`` / ``mR_up``: the same with y_1 <= ... <= y_N instead;
* ``classic`` / ``classic_weak``: the one-dimensional relation with m = 1
  (conditions M1-M3, respectively M1-M2).
"""

from __future__ import annotations

from dataclasses import dataclass
import enum
import json

import numpy as np

from .errors import GenerationError, InputError
from .order import DEFAULT_EPS_CONE, is_monotone_string
from .sampling import box_arrays, derive_rng

__all__ = [
    "DiscreteMeasure", "RelationKind", "MajorizationVerdict", "validate",
    "check_majorization", "generate_instance", "load_measure", "dump_measure",
    "DEFAULT_CHECK_TOL",
]

DEFAULT_CHECK_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-10


class RelationKind(str, enum.Enum):
    classic = "classic"
    classic_weak = "classic_weak"
    wmL_down = "wmL_down"
    mL_down = "mL_down"
    wmR_up = "wmR_up"
    mR_up = "mR_up"

    @property
    def strict(self):
        return self in (RelationKind.classic, RelationKind.mL_down, RelationKind.mR_up)

    @property
    def left(self):
        return self not in (RelationKind.wmR_up, RelationKind.mR_up)

    @property
    def weak_version(self):
        return {RelationKind.classic: RelationKind.classic_weak,
                RelationKind.mL_down: RelationKind.wmL_down,
                RelationKind.mR_up: RelationKind.wmR_up}.get(self, self)


def _kind(kind):
    try:
        return RelationKind(kind)
    except ValueError:
        raise InputError(f"unknown relation kind {kind!r}") from None


@dataclass(frozen=True)
class DiscreteMeasure:
    """sum_k weights[k] * delta_{points[k]}; ``points`` has shape ``(N, d)``."""

    weights: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        try:
            p = np.asarray(self.points, dtype=float)
        except ValueError:
            raise InputError("support points must all have the same dimension") from None
        if p.ndim == 1:
            p = p.reshape(-1, 1)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", p)

    @property
    def n(self):
        return self.weights.size

    @property
    def dim(self):
        return self.points.shape[1]

    def to_dict(self):
        return {"weights": self.weights.tolist(), "points": self.points.tolist()}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data["weights"], data["points"])
        except (KeyError, TypeError) as err:
            raise InputError(f"malformed measure: {err}") from err


def validate(mu):
    """Raise :class:`InputError` unless ``mu`` is a discrete probability measure."""
    w, p = mu.weights, mu.points
    if w.size == 0:
        raise InputError("measure has no support points")
    if p.ndim != 2 or p.shape[0] != w.size:
        raise InputError(f"{w.size} weights but {p.shape[0]} support points")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(p))):
        raise InputError("measure contains non-finite values")
    if np.any(w <= 0) or np.any(w > 1):
        k = int(np.flatnonzero((w <= 0) | (w > 1))[0])
        raise InputError(f"weight {k} = {w[k]} is outside (0, 1]")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise InputError(f"weights sum to {w.sum()!r}, not 1")
    return mu


@dataclass
class MajorizationVerdict:
    holds: bool
    kind: RelationKind
    m: float
    prefix_slacks: np.ndarray
    terminal_residual: np.ndarray
    failed_condition: str = None
    failed_index: int = None

    def to_dict(self):
        return {"holds": self.holds, "kind": self.kind.value, "m": self.m,
                "prefix_slacks": self.prefix_slacks.tolist(),
                "terminal_residual": self.terminal_residual.tolist(),
                "failed_condition": self.failed_condition,
                "failed_index": self.failed_index}


def prefix_slacks(mu, nu, m):
    """Rows S_1..S_N of the cumulative sums of lam_k (m y_k - x_k)."""
    lam = mu.weights[:, None]
    return np.cumsum(lam * (m * nu.points - mu.points), axis=0)


def check_majorization(mu, nu, m=1.0, kind="mL_down", tol=DEFAULT_CHECK_TOL,
                       eps_cone=DEFAULT_EPS_CONE):
    """Decide whether ``mu`` is majorized by ``nu`` in the sense of ``kind``.

    Conditions are tested in the order string order, prefix, terminal; the
    first failing one is reported in ``failed_condition``.
    """
    kind = _kind(kind)
    validate(mu)
    validate(nu)
    if mu.n != nu.n:
        raise InputError(f"measures have {mu.n} and {nu.n} support points")
    if mu.dim != nu.dim:
        raise InputError(f"measures live in dimensions {mu.dim} and {nu.dim}")
    if not np.allclose(mu.weights, nu.weights, rtol=0, atol=1e-12):
        raise InputError("both measures must carry the same weights")
    if not 0 < m <= 1:
        raise InputError(f"m must lie in (0, 1], got {m}")
    if kind in (RelationKind.classic, RelationKind.classic_weak):
        if mu.dim != 1:
            raise InputError("classical majorization needs one-dimensional supports")
        if m != 1:
            raise InputError("classical majorization is defined for m = 1 only")

    S = prefix_slacks(mu, nu, m)
    verdict = MajorizationVerdict(True, kind, float(m), S, S[-1].copy())
    if kind.left:
        ordered = is_monotone_string(mu.points, "decreasing", eps_cone)
    else:
        ordered = is_monotone_string(nu.points, "increasing", eps_cone)
    if not ordered:
        verdict.holds, verdict.failed_condition = False, "string_order"
        return verdict
    bad = np.flatnonzero(np.any(S < -tol, axis=1))
    if bad.size:
        verdict.holds, verdict.failed_condition = False, "prefix"
        verdict.failed_index = int(bad[0])
        return verdict
    if kind.strict and np.any(np.abs(S[-1]) > tol):
        verdict.holds, verdict.failed_condition = False, "terminal"
        verdict.failed_index = mu.n - 1
    return verdict


# ---------------------------------------------------------------------------
# Instance generation

def _sorted_string(rng, n, lo, hi, descending):
    pts = lo + (hi - lo) * rng.random((n, lo.size))
    pts = np.sort(pts, axis=0)
    return pts[::-1].copy() if descending else pts


def _dirichlet_weights(rng, n):
    w = rng.dirichlet(np.ones(n))
    w = np.maximum(w, 1e-3)
    return w / w.sum()


def generate_instance(kind, n, d, m, seed, domain_box=None, retries=200):
    """Random pair ``(mu, nu)`` with ``check_majorization(mu, nu, m, kind)`` true.

    The free parameters are the prefix slacks: nonnegative vectors
    d_1..d_N (d_N = 0 for the strict relations).  For the left relations a
    decreasing x-string is drawn and y is solved for; for the right ones an
    increasing y-string is drawn and x is solved for.  Candidates leaving
    ``domain_box`` are rejected and redrawn with smaller slacks.
    """
    kind = _kind(kind)
    if n < 1 or d < 1:
        raise InputError("need N >= 1 and d >= 1")
    if not 0 < m <= 1:
        raise InputError(f"m must lie in (0, 1], got {m}")
    if kind in (RelationKind.classic, RelationKind.classic_weak) and (d != 1 or m != 1):
        raise InputError("classical relations need d = 1 and m = 1")
    box = np.asarray(domain_box if domain_box is not None else [[-1.0, 1.0]] * d, dtype=float)
    lo, hi = box_arrays(box)
    if lo.size != d:
        raise InputError("domain box dimension does not match d")
    # The m-scaled partner must also fit: x ~ m y.
    if kind.left:
        s_lo, s_hi = np.maximum(lo, m * lo), np.minimum(hi, m * hi)
    else:
        s_lo, s_hi = np.maximum(lo, lo / m), np.minimum(hi, hi / m)
    if np.any(s_lo > s_hi):
        raise GenerationError("domain box leaves no room for an m-scaled partner")

    rng = derive_rng(seed, f"instance-{kind.value}")
    width = float(np.max(hi - lo))
    scale = 0.25 * width * m
    for _ in range(retries):
        lam = _dirichlet_weights(rng, n)
        slack = scale * lam.min() * rng.random((n, d))
        if kind.strict:
            slack[-1] = 0.0
        step = np.diff(np.vstack([np.zeros((1, d)), slack]), axis=0)
        if kind.left:
            x = _sorted_string(rng, n, s_lo, s_hi, descending=True)
            y = (lam[:, None] * x + step) / (m * lam[:, None])
        else:
            y = _sorted_string(rng, n, s_lo, s_hi, descending=False)
            x = (lam[:, None] * m * y - step) / lam[:, None]
        if np.all((x >= lo) & (x <= hi) & (y >= lo) & (y <= hi)):
            mu, nu = DiscreteMeasure(lam, x), DiscreteMeasure(lam, y)
            if check_majorization(mu, nu, m, kind).holds:
                return mu, nu
        scale *= 0.7
    raise GenerationError(f"no {kind.value} instance found in {retries} attempts")


def load_measure(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: invalid JSON: {err}") from err
    return validate(DiscreteMeasure.from_dict(data))


def dump_measure(mu, path):
    with open(path, "w") as fh:
        json.dump(mu.to_dict(), fh)
