"""Hardy-Littlewood-Polya type inequalities for m-majorized measures.

For ``mu = sum lam_k delta_{x_k}`` majorized by ``nu = sum lam_k delta_{y_k}``
the inequality under test is

    m sum lam_k Phi(y_k) >= sum lam_k Phi(x_k) + sum lam_k omega(|x_k - y_k|).

Summation by parts splits sum_k dPhi(x_k)(lam_k (m y_k - x_k)) into a
boundary term dPhi(x_N)(S_N) and telescoping terms
(dPhi(x_n) - dPhi(x_{n+1}))(S_n) with S_n the prefix slacks; these are
reported as diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import expr as ex
from .calculus import (SYMBOLIC, _directional, differential_isotonicity_check,
                       isotonicity_of_function_check)
from .errors import HypothesisViolation, InputError, PreconditionError
from .funclass import FunctionModel, star_convexity_certificate
from .measures import RelationKind, check_majorization, prefix_slacks
from .order import norm_rows
from .sampling import Sampler, sample_points

__all__ = [
    "HLPReport", "AbelDecomposition", "verify_hlp", "abel_decomposition",
    "perturbed_hlp_check", "catalog_function", "CATALOG",
    "ADVISORY_SAMPLER", "EMPIRICAL_NOTE",
]

HLP_TOL = 1e-8
ADVISORY_SAMPLER = Sampler(grid_points=0, n_random=400)
EMPIRICAL_NOTE = "empirical: no theorem statement covers the right relations"
PERTURBATION_NOTE = "allowance (1 + m) * delta applies to Psi = Phi + Pi, not to Phi"


@dataclass
class AbelDecomposition:
    boundary_term: float
    telescoping_terms: list

    @property
    def total(self):
        return self.boundary_term + float(np.sum(self.telescoping_terms))

    def to_dict(self):
        return {"boundary": self.boundary_term, "terms": list(self.telescoping_terms)}


@dataclass
class HLPReport:
    lhs: float
    rhs: float
    slack: float
    passed: bool
    relation_used: RelationKind
    scale: float
    advisories: dict = field(default_factory=dict)
    abel: AbelDecomposition = None

    def to_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "passed": self.passed, "relation": self.relation_used.value,
                "advisories": self.advisories,
                "abel": self.abel.to_dict() if self.abel else None}


def _require_relation(mu, nu, m, kind, tol=1e-9):
    verdict = check_majorization(mu, nu, m, kind, tol)
    if not verdict.holds:
        raise PreconditionError(
            f"relation {verdict.kind.value} fails: condition '{verdict.failed_condition}'",
            verdict.failed_condition)
    return verdict


def _require_support(model, *measures):
    lo, hi = model.box[:, 0], model.box[:, 1]
    for mu in measures:
        if mu.dim != model.dim:
            raise InputError(f"support dimension {mu.dim} differs from model dimension {model.dim}")
        pts = mu.points
        span = hi - lo
        if np.any(pts < lo - 1e-12 * (1 + span)) or np.any(pts > hi + 1e-12 * (1 + span)):
            raise InputError("support point outside the model's domain box")


def abel_decomposition(mu, nu, model, spec=SYMBOLIC):
    """Boundary and telescoping terms of the summation-by-parts identity."""
    S = prefix_slacks(mu, nu, model.m)
    x = mu.points
    n = x.shape[0]
    boundary = float(_directional(model, x[-1:], S[-1:], spec)[0])
    if n == 1:
        return AbelDecomposition(boundary, [])
    head = _directional(model, x[:-1], S[:-1], spec)
    tail = _directional(model, x[1:], S[:-1], spec)
    return AbelDecomposition(boundary, (head - tail).tolist())


def _advisories(mu, nu, model, kind, advisory_sampler):
    pts = np.vstack([mu.points, nu.points])
    bbox = np.stack([pts.min(axis=0), pts.max(axis=0)], axis=1)
    flat = bbox[:, 1] - bbox[:, 0] <= 0
    bbox[flat, 1] = bbox[flat, 0] + 1e-6
    bbox[flat, 0] -= 1e-6
    star = star_convexity_certificate(model, advisory_sampler)
    iso = differential_isotonicity_check(model, advisory_sampler, box=bbox)
    out = {"star_convexity": star.passed, "star_worst_slack": star.worst_slack,
           "differential_isotone_entrywise": iso.entrywise.passed,
           "differential_isotone_direct": iso.direct.passed}
    if not kind.strict:
        phi_iso = isotonicity_of_function_check(model, advisory_sampler, box=bbox)
        out["phi_isotone"] = phi_iso.passed
    if not kind.left:
        out["note"] = EMPIRICAL_NOTE
    return out


def verify_hlp(mu, nu, model, kind="mL_down", spec=SYMBOLIC, tol=HLP_TOL,
               advisories=True, advisory_sampler=ADVISORY_SAMPLER, check_tol=None):
    """Evaluate the inequality on a majorized pair.

    The relation is a hard precondition (:class:`PreconditionError`);
    star-convexity and isotonicity hypotheses are sampled and attached as
    advisories only.  ``passed`` uses the scaled tolerance
    ``tol * (1 + |lhs| + |rhs|)``.
    """
    kind = RelationKind(kind)
    _require_relation(mu, nu, model.m, kind, 1e-9 if check_tol is None else check_tol)
    _require_support(model, mu, nu)
    lam = mu.weights
    fy, fx = model(nu.points), model(mu.points)
    om = model.omega(norm_rows(mu.points - nu.points, model.norm))
    lhs = float(model.m * np.sum(lam * fy))
    rhs = float(np.sum(lam * fx) + np.sum(lam * om))
    slack = lhs - rhs
    scale = 1 + abs(lhs) + abs(rhs)
    adv = _advisories(mu, nu, model, kind, advisory_sampler) if advisories else {}
    return HLPReport(lhs, rhs, slack, bool(slack >= -tol * scale), kind, scale, adv,
                     abel_decomposition(mu, nu, model, spec))


def perturbed_hlp_check(mu, nu, model, pi, delta, kind="mL_down", tol=HLP_TOL,
                        sampler=None, spec=SYMBOLIC, advisories=False):
    """The inequality for Psi = Phi + Pi with the allowance (1 + m) delta.

    ``pi`` is an expression (or text) over the model's variables; its
    sampled sup-norm on the box (and at the support points) must not exceed
    ``delta``.
    """
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if isinstance(pi, str):
        pi = ex.parse(pi, model.dim)
    kind = RelationKind(kind)
    _require_relation(mu, nu, model.m, kind, 1e-9)
    _require_support(model, mu, nu)
    sampler = sampler or Sampler()
    pts = np.vstack([sample_points(model.box, sampler, name="perturbation"),
                     mu.points, nu.points])
    sup = float(np.max(np.abs(ex.evaluate(pi, pts))))
    if sup > delta * (1 + 1e-12):
        raise HypothesisViolation(f"sampled sup|Pi| = {sup} exceeds delta = {delta}",
                                  {"sup_abs_pi": sup})
    psi = replace(model, body=ex.BinOp("+", model.body, pi), name="")
    base = verify_hlp(mu, nu, psi, kind, spec, tol, advisories=advisories)
    allowance = (1 + model.m) * delta
    rhs = base.rhs - allowance
    slack = base.lhs - rhs
    scale = 1 + abs(base.lhs) + abs(rhs)
    adv = dict(base.advisories)
    adv["perturbation"] = {"delta": delta, "allowance": allowance, "sup_abs_pi": sup,
                           "raw_slack": base.slack, "note": PERTURBATION_NOTE}
    return HLPReport(base.lhs, rhs, slack, bool(slack >= -tol * scale), kind, scale,
                     adv, base.abel)


# ---------------------------------------------------------------------------
# Catalog of functions that are convex, vanish at the origin and have
# entrywise nonnegative Hessians (hence m-star-convex for every m).

def _sum_expr(d, term):
    out = term(0)
    for i in range(1, d):
        out = ex.BinOp("+", out, term(i))
    return out


def _exp_term(i, w=1.0):
    core = ex.BinOp("-", ex.Call("exp", (ex.Var(i),)), ex.Num(1.0))
    return core if w == 1.0 else ex.BinOp("*", ex.num(w), core)


def _sq_term(i, w=1.0):
    core = ex.Pow(ex.Var(i), ex.Num(2.0))
    return core if w == 1.0 else ex.BinOp("*", ex.num(w), core)


CATALOG = ("exp-sum", "square-sum", "weighted")


def catalog_function(name, d, m=1.0, domain=None, omega=None, weights=None):
    """Build a catalog model of dimension ``d``.

    ``exp-sum``: sum (exp(x_i) - 1); ``square-sum``: sum x_i^2;
    ``weighted``: sum a_i (exp(x_i) - 1) + b_i x_i^2 with positive a, b.
    """
    domain = domain if domain is not None else [(-1.0, 1.0)] * d
    if name == "exp-sum":
        body = _sum_expr(d, _exp_term)
    elif name == "square-sum":
        body = _sum_expr(d, _sq_term)
    elif name == "weighted":
        a, b = weights if weights is not None else (
            [1.0 + 0.5 * i for i in range(d)], [0.5 + 0.25 * i for i in range(d)])
        body = ex.BinOp("+", _sum_expr(d, lambda i: _exp_term(i, a[i])),
                        _sum_expr(d, lambda i: _sq_term(i, b[i])))
    else:
        raise InputError(f"unknown catalog function {name!r}")
    kw = {} if omega is None else {"omega": omega}
    return FunctionModel(body, d, tuple(domain), m, name=name, **kw)
