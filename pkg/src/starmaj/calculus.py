"""Differentials, gradient inequalities and isotonicity checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import expr as ex
from .errors import ConfigurationError, EvaluationError, HypothesisViolation, InputError
from .funclass import DEFAULT_TOL, CertificateReport, _finish, _jsonable
from .order import as_vector, norm_rows
from .sampling import (MinTracker, Sampler, box_arrays, derive_rng, interior_box,
                       iter_pairs, sample_points, uniform)

__all__ = [
    "GradientSpec", "gradient", "hessian", "gateaux",
    "gradient_inequality_slacks", "gradient_inequality_check",
    "mp_gradient_inequality_slacks", "mp_gradient_inequality_check",
    "hessian_min_entries", "IsotonicityReport", "differential_isotonicity_check",
    "isotonicity_of_function_check", "critical_point_bound_check",
]


@dataclass(frozen=True)
class GradientSpec:
    mode: str = "symbolic"
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.mode not in ("symbolic", "finite_difference"):
            raise InputError(f"unknown gradient mode {self.mode!r}")
        if not self.fd_step > 0:
            raise InputError("fd_step must be positive")


SYMBOLIC = GradientSpec()


def gradient(model, X, spec=SYMBOLIC):
    """Gradient rows at the points ``X`` (shape ``(n, d)`` or ``(d,)``)."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if spec.mode == "symbolic":
        G = np.stack([ex.evaluate(g, X) for g in ex.gradient_exprs(model.body, model.dim)],
                     axis=1)
    else:
        h = spec.fd_step
        cols = []
        for i in range(model.dim):
            step = np.zeros(model.dim)
            step[i] = h
            cols.append((model(X + step) - model(X - step)) / (2 * h))
        G = np.stack(cols, axis=1)
    return G[0] if single else G


def hessian(model, X):
    """Symbolic Hessians at ``X``; shape ``(n, d, d)`` (or ``(d, d)``)."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    H = np.stack([np.stack([ex.evaluate(h, X) for h in row], axis=1)
                  for row in ex.hessian_exprs(model.body, model.dim)], axis=1)
    return H[0] if single else H


def gateaux(model, x, h, spec=SYMBOLIC):
    """Directional derivative d Phi(x)(h)."""
    x, h = as_vector(x), as_vector(h)
    if x.size != model.dim or h.size != model.dim:
        raise InputError("point and direction must match the model dimension")
    if spec.mode == "symbolic":
        return float(gradient(model, x, spec) @ h)
    s = spec.fd_step
    return (model(x + s * h) - model(x - s * h)) / (2 * s)


def _directional(model, X, D, spec):
    """Row-wise d Phi(X_i)(D_i)."""
    if spec.mode == "symbolic":
        return np.sum(gradient(model, X, spec) * D, axis=1)
    s = spec.fd_step
    return (model(X + s * D) - model(X - s * D)) / (2 * s)


def _pair(X, Y, i):
    return {"x": X[i].tolist(), "y": Y[i].tolist()}


def _run_pairs(kind, model, slack_fn, sampler, tol, box=None, extra=None):
    sampler = sampler or Sampler()
    box = model.box if box is None else box
    tracker = MinTracker()
    for X, Y in iter_pairs(box, sampler, name=kind):
        try:
            s = slack_fn(X, Y)
        except EvaluationError as err:
            raise ConfigurationError(f"{kind}: {err}", _pair(X, Y, err.index)) from err
        tracker.update(s, lambda i: _pair(X, Y, i))
    config = {"sampler": sampler.to_dict(), "tol": tol, "m": model.m,
              "omega": model.omega.to_dict(), "norm": model.norm}
    config.update(extra or {})
    return _finish(kind, tracker, tol, config)


def gradient_inequality_slacks(model, X, Y, spec=SYMBOLIC):
    """m Phi(y) - Phi(x) - dPhi(x)(m y - x) - m omega(|x - y|), row-wise."""
    m = model.m
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    om = model.omega(norm_rows(X - Y, model.norm))
    return m * model(Y) - model(X) - _directional(model, X, m * Y - X, spec) - m * om


def gradient_inequality_check(model, sampler=None, spec=SYMBOLIC, tol=DEFAULT_TOL):
    return _run_pairs("gradient-inequality", model,
                      lambda X, Y: gradient_inequality_slacks(model, X, Y, spec),
                      sampler, tol, model.box, {"gradient": spec.mode})


def mp_gradient_inequality_slacks(model, X, Y, p, spec=SYMBOLIC):
    """Power-mean gradient inequality slack.

    p != 0:  Phi(y)^p - Phi(x)^p - p Phi(x)^(p-1) dPhi(x)(y - x) - m omega(|x - y|)
    p == 0:  log Phi(y) - log Phi(x) - dPhi(x)(y - x) / Phi(x)   (no omega term)
    """
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    fx, fy = model(X), model(Y)
    for vals, pts in ((fx, X), (fy, Y)):
        bad = vals <= 0 if p <= 0 else vals < 0
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise HypothesisViolation(
                f"Phi must be {'positive' if p <= 0 else 'nonnegative'} for p = {p}",
                {"point": pts[i].tolist(), "value": float(vals[i])})
    dphi = _directional(model, X, Y - X, spec)
    if p == 0:
        return np.log(fy) - np.log(fx) - dphi / fx
    om = model.omega(norm_rows(X - Y, model.norm))
    with np.errstate(divide="ignore", invalid="ignore"):
        lin = p * np.power(fx, p - 1) * dphi
    lin = np.where(dphi == 0, 0.0, lin)
    return np.power(fy, p) - np.power(fx, p) - lin - model.m * om


def mp_gradient_inequality_check(model, p, sampler=None, spec=SYMBOLIC, tol=DEFAULT_TOL):
    return _run_pairs("mp-gradient-inequality", model,
                      lambda X, Y: mp_gradient_inequality_slacks(model, X, Y, p, spec),
                      sampler, tol, model.box, {"p": _jsonable(float(p)), "gradient": spec.mode})


# ---------------------------------------------------------------------------
# Isotonicity

def hessian_min_entries(model, X):
    """Smallest Hessian entry at each point, with its ``(i, j)`` position."""
    H = hessian(model, np.atleast_2d(X))
    flat = H.reshape(H.shape[0], -1)
    k = np.argmin(flat, axis=1)
    return flat[np.arange(flat.shape[0]), k], np.stack(np.divmod(k, model.dim), axis=1)


@dataclass
class IsotonicityReport:
    entrywise: CertificateReport
    direct: CertificateReport

    @property
    def passed(self):
        return self.entrywise.passed and self.direct.passed

    def to_dict(self):
        return {"passed": self.passed, "entrywise": self.entrywise.to_dict(),
                "direct": self.direct.to_dict()}


def _comparable_pairs(box, n, rng):
    """Random pairs x <= y inside ``box``."""
    lo, hi = box_arrays(box)
    X = uniform(box, n, rng)
    Y = X + (hi - X) * rng.random(X.shape)
    return X, np.minimum(Y, hi)


def differential_isotonicity_check(model, sampler=None, tol=DEFAULT_TOL, box=None,
                                   points=None):
    """Whether x -> grad Phi(x) is order preserving, checked two ways.

    ``entrywise``: every Hessian entry is >= -tol at sampled interior points
    (plus any explicit ``points``); this is a sufficient condition.
    ``direct``: grad Phi(x) <= grad Phi(y) coordinatewise for sampled
    comparable pairs x <= y.
    """
    sampler = sampler or Sampler()
    box = interior_box(model.box if box is None else box)
    pts = sample_points(box, sampler, name="isotonicity-points")
    if points is not None:
        pts = np.concatenate([pts, np.atleast_2d(np.asarray(points, dtype=float))])
    config = {"sampler": sampler.to_dict(), "tol": tol, "box": box.tolist()}

    ent = MinTracker()
    vals, where = hessian_min_entries(model, pts)
    ent.update(vals, lambda i: {"point": pts[i].tolist(),
                                "entry": where[i].tolist(), "value": float(vals[i])})
    entry_report = _finish("isotonicity-entrywise", ent, tol, config)
    entry_report.config = dict(config, violations=int(np.sum(vals < -tol)),
                               points=int(pts.shape[0]))

    direct = MinTracker()
    n = max(sampler.n_random, 1)
    X, Y = _comparable_pairs(box, n, derive_rng(sampler.seed, "isotonicity-pairs"))
    diff = gradient(model, Y) - gradient(model, X)
    dmin = diff.min(axis=1)
    direct.update(dmin, lambda i: {"x": X[i].tolist(), "y": Y[i].tolist(),
                                   "gradient_gap": diff[i].tolist()})
    return IsotonicityReport(entry_report, _finish("isotonicity-direct", direct, tol, config))


def isotonicity_of_function_check(model, sampler=None, tol=DEFAULT_TOL, box=None):
    """Whether Phi itself is isotone: Phi(x) <= Phi(y) for sampled x <= y."""
    sampler = sampler or Sampler()
    box = model.box if box is None else np.asarray(box, dtype=float)
    X, Y = _comparable_pairs(box, max(sampler.n_random, 1),
                             derive_rng(sampler.seed, "phi-isotonicity"))
    tracker = MinTracker()
    s = model(Y) - model(X)
    tracker.update(s, lambda i: _pair(X, Y, i))
    grads = gradient(model, X)
    tracker.update(grads.min(axis=1),
                   lambda i: {"point": X[i].tolist(), "gradient": grads[i].tolist()})
    return _finish("phi-isotonicity", tracker, tol,
                   {"sampler": sampler.to_dict(), "tol": tol, "box": np.asarray(box).tolist()})


# ---------------------------------------------------------------------------
# Critical points

def critical_point_bound_check(model, sampler=None, tol_grad=None, tol=DEFAULT_TOL,
                               polish=True):
    """At near-critical points x (small gradient), check m * inf Phi >= Phi(x).

    The infimum is the sampled minimum over the box.  Sampled points are
    polished by a root finder on the gradient before the threshold test,
    since random points are never exactly critical.  ``tol_grad`` defaults
    to ``1e-6 * (1 + |Phi(x)|)``.
    """
    if not model.omega.is_zero:
        t = np.linspace(0.0, 10.0, 101)
        if np.any(model.omega(t) < 0):
            raise HypothesisViolation("critical-point bound needs omega >= 0")
    sampler = sampler or Sampler()
    box = interior_box(model.box)
    lo, hi = box_arrays(box)
    pts = sample_points(model.box, sampler, name="critical-points")
    phi = model(pts)
    candidates = [pts]
    if polish:
        starts = sample_points(box, Sampler(grid_points=min(sampler.grid_points, 11),
                                            n_random=min(sampler.n_random, 50),
                                            seed=sampler.seed), name="critical-starts")
        found = []
        for x in starts:
            try:
                sol = optimize.root(lambda z: gradient(model, z), x,
                                    jac=lambda z: hessian(model, z), method="hybr")
            except (EvaluationError, ValueError):
                continue
            z = sol.x
            if np.all(np.isfinite(z)) and np.all(z > lo) and np.all(z < hi):
                found.append(z)
        if found:
            found = np.unique(np.round(np.array(found), 10), axis=0)
            candidates.append(found)
    cand = np.concatenate(candidates, axis=0)
    fc = model(cand)
    inside = np.all((cand > lo) & (cand < hi), axis=1)
    gnorm = np.linalg.norm(gradient(model, cand), axis=1)
    thresh = (1e-6 * (1 + np.abs(fc))) if tol_grad is None else np.full(fc.shape, tol_grad)
    crit = inside & (gnorm <= thresh)
    inf_phi = float(min(phi.min(), fc.min()))
    config = {"sampler": sampler.to_dict(), "tol": tol, "m": model.m,
              "sampled_inf": inf_phi, "polish": polish,
              "tol_grad": "scale-aware" if tol_grad is None else tol_grad}
    tracker = MinTracker()
    cp = cand[crit]
    s = model.m * inf_phi - fc[crit]
    tracker.update(s, lambda i: {"point": cp[i].tolist(), "value": float(fc[crit][i])})
    report = _finish("critical-point-bound", tracker, tol, config,
                     empty_note="no near-critical points found")
    report.config["critical_points"] = np.unique(np.round(cp, 8), axis=0).tolist()
    return report
