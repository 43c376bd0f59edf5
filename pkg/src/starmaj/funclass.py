"""Sampled certificates for omega-m-star-convexity and its variants.

A function Phi on a box C is omega-m-star-convex when

    Phi((1-lam) x + lam m y) <= (1-lam) Phi(x) + m lam Phi(y) - m lam (1-lam) omega(|x - y|)

for all x, y in C and lam in (0, 1).  The certificates below evaluate the
slack ``RHS - LHS`` on a deterministic sample and report the worst one.
They are numerical evidence, not proofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import expr as ex
from .errors import (ConfigurationError, EvaluationError, HypothesisViolation,
                     InputError)
from .order import as_vector, norm_rows
from .sampling import (MinTracker, Sampler, box_arrays, derive_rng, iter_triples)

__all__ = [
    "ModulusSpec", "FunctionModel", "CertificateReport", "MocanuEstimate",
    "LocalProbeResult", "star_convexity_slacks", "star_convexity_certificate",
    "midpoint_convexity_check", "mocanu_m_estimate", "mocanu_bracketing",
    "perspective", "mp_mean", "mp_star_convexity_slacks",
    "mp_star_convexity_certificate", "delta_star_convexity_certificate",
    "local_star_convexity_probe",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ModulusSpec:
    """The modulus omega: ``zero``, ``power`` (c * t**q) or an expression in ``t``."""

    kind: str = "zero"
    c: float = 0.0
    q: float = 2.0
    expr: ex.Expression = None
    uniform: bool = False

    def __post_init__(self):
        if self.kind not in ("zero", "power", "expression"):
            raise InputError(f"unknown modulus kind {self.kind!r}")
        if self.kind == "power" and (self.c < 0 or self.q <= 0):
            raise InputError("power modulus needs c >= 0 and q > 0")
        if self.kind == "expression":
            if self.expr is None:
                raise InputError("expression modulus needs an expression")
            if isinstance(self.expr, str):
                object.__setattr__(self, "expr", ex.parse_modulus(self.expr))
            if abs(ex.evaluate(self.expr, [0.0])) > 1e-12:
                raise InputError("modulus must vanish at t = 0")
        if self.uniform:
            t = np.linspace(1e-6, 10.0, 200)
            if np.any(self(t) <= 0):
                raise InputError("uniform modulus must be positive for t > 0")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "power":
            return self.c * np.power(t, self.q)
        return np.asarray(ex.evaluate(self.expr, t.reshape(-1, 1))).reshape(t.shape)

    @property
    def is_zero(self):
        return self.kind == "zero" or (self.kind == "power" and self.c == 0)

    def scaled(self, s):
        """Modulus ``s * omega``."""
        if s < 0:
            raise InputError("modulus scale must be nonnegative")
        if self.kind == "zero":
            return self
        if self.kind == "power":
            return replace(self, c=self.c * s)
        return replace(self, expr=ex.num(s) * self.expr)

    def to_dict(self):
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "q": self.q}
        return {"kind": "expression", "expr": ex.to_text(self.expr)}

    @classmethod
    def from_dict(cls, data):
        if data is None:
            return cls()
        kind = data.get("kind", "zero")
        if kind == "power":
            return cls("power", float(data.get("c", 0.0)), float(data.get("q", 2.0)))
        if kind == "expression":
            return cls("expression", expr=ex.parse_modulus(data["expr"]))
        return cls(kind)


@dataclass(frozen=True)
class FunctionModel:
    """A candidate Phi: expression body on a box, with parameter m and modulus."""

    body: ex.Expression
    dim: int
    domain: tuple
    m: float = 1.0
    omega: ModulusSpec = field(default_factory=ModulusSpec)
    norm: str = "euclidean"
    name: str = ""

    def __post_init__(self):
        if isinstance(self.body, str):
            object.__setattr__(self, "body", ex.parse(self.body, self.dim))
        dom = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        object.__setattr__(self, "domain", dom)
        if len(dom) != self.dim:
            raise InputError(f"domain has {len(dom)} intervals, dimension is {self.dim}")
        if ex.arity(self.body) > self.dim:
            raise InputError("expression uses more variables than the dimension")
        if not 0.0 < self.m <= 1.0:
            raise InputError(f"m must lie in (0, 1], got {self.m}")
        if self.norm not in ("euclidean", "sup"):
            raise InputError(f"unknown norm {self.norm!r}")
        lo, hi = box_arrays(dom)
        try:
            ex.evaluate(self.body, (lo + hi) / 2)
        except EvaluationError as err:
            raise InputError(f"body is not evaluable at the box center: {err}") from err

    @property
    def box(self):
        return np.asarray(self.domain, dtype=float)

    @property
    def text(self):
        return ex.to_text(self.body)

    def __call__(self, X):
        return ex.evaluate(self.body, X)

    def with_m(self, m):
        return replace(self, m=float(m))

    def to_dict(self):
        out = {"expr": self.text, "dim": self.dim,
               "domain": [list(iv) for iv in self.domain], "m": self.m,
               "omega": self.omega.to_dict()}
        if self.norm != "euclidean":
            out["norm"] = self.norm
        return out

    @classmethod
    def from_dict(cls, data, name=""):
        try:
            dim = int(data["dim"])
            return cls(ex.parse(data["expr"], dim), dim, tuple(map(tuple, data["domain"])),
                       float(data.get("m", 1.0)), ModulusSpec.from_dict(data.get("omega")),
                       data.get("norm", "euclidean"), name)
        except (KeyError, TypeError) as err:
            raise InputError(f"malformed function model: {err}") from err


@dataclass
class CertificateReport:
    kind: str
    passed: bool
    samples_tested: int
    worst_slack: float
    witness: dict = None
    config: dict = field(default_factory=dict)
    note: str = ""

    def to_dict(self):
        return {"kind": self.kind, "passed": self.passed,
                "samples_tested": self.samples_tested,
                "worst_slack": _jsonable(self.worst_slack),
                "witness": self.witness, "config": self.config, "note": self.note}


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _triple(X, Y, L, i):
    return {"x": X[i].tolist(), "y": Y[i].tolist(), "lambda": float(L[i])}


def _finish(kind, tracker, tol, config, empty_note="no samples"):
    if tracker.count == 0:
        return CertificateReport(kind, True, 0, float("inf"), None, config, empty_note)
    worst = tracker.worst
    passed = bool(worst == worst and worst >= -tol)
    return CertificateReport(kind, passed, tracker.count, worst,
                             None if passed else tracker.witness, config)


def _run_triples(kind, model, slack_fn, sampler, tol, extra_config=None):
    sampler = sampler or Sampler()
    tracker = MinTracker()
    g = sampler.effective_grid_points(model.dim)
    for X, Y, L in iter_triples(model.box, sampler, name=kind):
        try:
            s = slack_fn(X, Y, L)
        except EvaluationError as err:
            w = _triple(X, Y, L, err.index)
            raise ConfigurationError(
                f"{kind}: evaluation left the evaluable region ({err})", w) from err
        tracker.update(s, lambda i: _triple(X, Y, L, i))
    config = {"sampler": sampler.to_dict(), "effective_grid_points": g, "tol": tol,
              "m": model.m, "omega": model.omega.to_dict(), "norm": model.norm}
    config.update(extra_config or {})
    return _finish(kind, tracker, tol, config)


def star_convexity_slacks(model, X, Y, L, m=None, delta=0.0):
    """Slack RHS - LHS of the defining inequality at each row ``(x, y, lam)``."""
    m = model.m if m is None else m
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    L = np.asarray(L, dtype=float).reshape(-1)
    mixed = (1 - L)[:, None] * X + (L * m)[:, None] * Y
    om = model.omega(norm_rows(X - Y, model.norm))
    rhs = (1 - L) * model(X) + m * L * model(Y) - m * L * (1 - L) * om + delta
    return rhs - model(mixed)


def star_convexity_certificate(model, sampler=None, tol=DEFAULT_TOL):
    """Sampled check of omega-m-star-convexity of ``model`` on its box."""
    return _run_triples("star", model, lambda X, Y, L: star_convexity_slacks(model, X, Y, L),
                        sampler, tol)


def delta_star_convexity_certificate(model, delta, sampler=None, tol=DEFAULT_TOL):
    """Same as :func:`star_convexity_certificate` with ``+delta`` on the right."""
    if delta < 0:
        raise InputError("delta must be nonnegative")
    return _run_triples(
        "delta-star", model,
        lambda X, Y, L: star_convexity_slacks(model, X, Y, L, delta=delta),
        sampler, tol, {"delta": delta})


def midpoint_convexity_check(model, grid_points=201, tol=DEFAULT_TOL):
    """Plain midpoint convexity (m = 1, lam = 1/2) over all grid pairs.

    A failure witness is a point pair at which the function is strictly
    midpoint-concave.
    """
    sampler = Sampler(grid_points=grid_points, lambdas=(0.5,), n_random=0)
    flat = replace(model, m=1.0, omega=ModulusSpec())
    report = star_convexity_certificate(flat, sampler, tol)
    report.kind = "midpoint-convexity"
    return report


# ---------------------------------------------------------------------------
# Mocanu's estimator of the best m for a function of one variable

@dataclass
class MocanuEstimate:
    value: float
    raw: float
    admissible_pairs: int
    witness: dict = None
    empty: bool = False
    grid: int = 0
    note: str = ""

    def to_dict(self):
        return {"value": self.value, "raw": _jsonable(self.raw),
                "admissible_pairs": self.admissible_pairs, "witness": self.witness,
                "empty": self.empty, "grid": self.grid, "note": self.note}


def mocanu_m_estimate(model, grid=2000, tol_den=1e-9):
    """Infimum over grid pairs of (x f'(x) - f(x)) / (y f'(x) - f(y)).

    Only pairs with denominator above ``tol_den`` are admissible.  The value
    is clamped to (0, 1]; ``empty`` flags the case with no admissible pair
    (value 1 is then not an estimate).
    """
    if model.dim != 1:
        raise InputError("Mocanu estimate needs a one-dimensional model")
    lo, hi = model.domain[0]
    x = np.linspace(lo, hi, int(grid))
    pts = x.reshape(-1, 1)
    f = model(pts)
    fp = ex.evaluate(ex.differentiate(model.body, 0), pts)
    numer = (x * fp - f)[:, None]
    denom = x[None, :] * fp[:, None] - f[None, :]
    ok = denom > tol_den
    count = int(ok.sum())
    if count == 0:
        return MocanuEstimate(1.0, float("nan"), 0, None, True, int(grid),
                              "no admissible pair")
    ratio = np.where(ok, numer / np.where(ok, denom, 1.0), np.inf)
    flat = int(np.argmin(ratio))
    i, j = divmod(flat, x.size)
    raw = float(ratio[i, j])
    value = min(1.0, max(raw, np.finfo(float).tiny))
    note = "clamped" if value != raw else ""
    return MocanuEstimate(value, raw, count, {"x": float(x[i]), "y": float(x[j])},
                          False, int(grid), note)


def mocanu_bracketing(model, estimate, sampler=None, tol=DEFAULT_TOL,
                      lower_factor=1e-3, upper_factor=1e-2,
                      probe_lambdas=(1e-2, 1e-3, 1e-4, 1e-5)):
    """Certificates just below and just above an estimated m.

    ``estimate`` is a :class:`MocanuEstimate` or a bare value.  The lower
    certificate (``m_hat * (1 - lower_factor)``) must pass.  Above the
    estimate the sampled certificate may still pass, because the ratio
    describes the lam -> 0 limit; the estimate's witness pair is therefore
    also probed at small lam, where the slack should turn negative.
    """
    m_hat = estimate.value if isinstance(estimate, MocanuEstimate) else float(estimate)
    witness = estimate.witness if isinstance(estimate, MocanuEstimate) else None
    lower_m = m_hat * (1 - lower_factor)
    low = star_convexity_certificate(model.with_m(lower_m), sampler, tol)
    out = {"m_hat": m_hat, "lower_m": lower_m, "lower_passed": low.passed,
           "lower_worst_slack": low.worst_slack}
    if m_hat < 1:
        upper_m = min(1.0, m_hat * (1 + upper_factor))
        up = star_convexity_certificate(model.with_m(upper_m), sampler, tol)
        out.update(upper_m=upper_m, upper_passed=up.passed,
                   upper_worst_slack=up.worst_slack)
        if witness is not None:
            lam = np.asarray(probe_lambdas, dtype=float)
            X = np.full((lam.size, 1), witness["x"])
            Y = np.full((lam.size, 1), witness["y"])
            s = star_convexity_slacks(model, X, Y, lam, m=upper_m)
            out["upper_witness_slack"] = float(s.min())
            out["upper_witness_lambda"] = float(lam[int(np.argmin(s))])
            out["upper_marginal"] = bool(not up.passed or s.min() < 0)
    out["holds"] = bool(low.passed)
    return out


# ---------------------------------------------------------------------------
# Perspective

def perspective(model, t_interval, assert_cone=False):
    """The function (x, t) -> t * Phi(x / t), one dimension higher.

    The new coordinate is the last one (``x{d}``); ``t_interval`` must lie
    in (0, inf).  The box of ``model`` must sit in the nonnegative orthant
    unless ``assert_cone`` is set.
    """
    t_lo, t_hi = map(float, t_interval)
    if not 0 < t_lo <= t_hi:
        raise InputError("t interval must be a nonempty subset of (0, inf)")
    if not assert_cone and any(lo < 0 for lo, _ in model.domain):
        raise InputError("perspective needs a box inside the nonnegative orthant")
    d = model.dim
    t = ex.Var(d)
    scaled = ex.substitute(model.body, {i: ex.Var(i) / t for i in range(d)})
    body = t * scaled
    name = f"perspective({model.name})" if model.name else ""
    return FunctionModel(body, d + 1, model.domain + ((t_lo, t_hi),), model.m,
                         model.omega, model.norm, name)


# ---------------------------------------------------------------------------
# Power means

def _log_mp(la, lb, lam, p):
    """log M_p from the logs of the arguments, for finite p != 0.

    The dominant term is factored out.  Near p = 0 the remainder goes through
    expm1/log1p, where the naive form loses every digit; far from it the
    reference weight is used directly so tiny weights are not absorbed.
    """
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        a_ref = p * la >= p * lb
        ref = np.where(a_ref, la, lb)
        other = np.where(a_ref, lb, la)
        w = np.where(a_ref, lam, 1 - lam)
        w_ref = np.where(a_ref, 1 - lam, lam)
        x = p * (other - ref)
        inner = np.where(x > -1, np.log1p(w * np.expm1(x)), np.log(w_ref + w * np.exp(x)))
        out = ref + inner / p
    out = np.where(lam == 0, la, np.where(lam == 1, lb, out))
    return np.where(la == lb, la, out)


def mp_mean(a, b, lam, p):
    """Weighted power mean M_p(a, b; 1 - lam, lam).

    ``p`` may be any real number or +-inf.  Zero arguments are allowed only
    for p > 0.  Works elementwise on arrays.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lam = np.asarray(lam, dtype=float)
    scalar = a.ndim == 0 and b.ndim == 0 and lam.ndim == 0
    if np.any((lam < 0) | (lam > 1)):
        raise InputError("lambda must lie in [0, 1]")
    if p <= 0:
        if np.any(a <= 0) or np.any(b <= 0):
            raise InputError("M_p with p <= 0 needs strictly positive arguments")
    elif np.any(a < 0) or np.any(b < 0):
        raise InputError("M_p needs nonnegative arguments")
    if p == math.inf:
        out = np.maximum(a, b)
    elif p == -math.inf:
        out = np.minimum(a, b)
    else:
        with np.errstate(divide="ignore"):
            la, lb = np.log(a), np.log(b)
        if p == 0:
            with np.errstate(invalid="ignore"):
                out = np.where(la == lb, a, np.exp((1 - lam) * la + lam * lb))
        else:
            out = np.where(a == b, a, np.exp(_log_mp(la, lb, lam, p)))
    return float(out) if scalar else out


def _mp_combine(fx, fy, w1, w2, p):
    """(w1 fx^p + w2 fy^p)^(1/p) with the p = 0, +-inf limits.

    The weights need not sum to one: the result is (w1 + w2)^(1/p) times
    the normalized mean.
    """
    if p == math.inf:
        return np.maximum(fx, fy)
    if p == -math.inf:
        return np.minimum(fx, fy)
    with np.errstate(divide="ignore"):
        lx, ly = np.log(fx), np.log(fy)
        if p == 0:
            return np.exp(w1 * lx + w2 * ly)
        total = w1 + w2
        return np.exp(np.log(total) / p + _log_mp(lx, ly, w2 / total, p))


def _check_signs(model, values, pts, p):
    bad = values <= 0 if p <= 0 else values < 0
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        need = "positive" if p <= 0 else "nonnegative"
        raise HypothesisViolation(f"Phi must be {need} for p = {p}",
                                  {"point": pts[i].tolist(), "value": float(values[i])})


def mp_star_convexity_slacks(model, X, Y, L, p, mix_with_m=False):
    """Slack of Phi((1-l)x + l y) <= ((1-l)Phi(x)^p + m l Phi(y)^p)^(1/p) - m l(1-l) omega.

    With ``mix_with_m`` the argument on the left is ``(1-l)x + l m y``.
    At p = 0 the right side is Phi(x)^(1-l) Phi(y)^(m l) minus the omega term.
    """
    m = model.m
    X, Y = np.atleast_2d(X), np.atleast_2d(Y)
    L = np.asarray(L, dtype=float).reshape(-1)
    coef = L * m if mix_with_m else L
    mixed = (1 - L)[:, None] * X + coef[:, None] * Y
    fx, fy = model(X), model(Y)
    _check_signs(model, fx, X, p)
    _check_signs(model, fy, Y, p)
    om = model.omega(norm_rows(X - Y, model.norm))
    rhs = _mp_combine(fx, fy, 1 - L, m * L, p) - m * L * (1 - L) * om
    return rhs - model(mixed)


def mp_star_convexity_certificate(model, p, sampler=None, tol=DEFAULT_TOL, mix_with_m=False):
    return _run_triples(
        "mp-star", model,
        lambda X, Y, L: mp_star_convexity_slacks(model, X, Y, L, p, mix_with_m),
        sampler, tol, {"p": _jsonable(float(p)), "mix_with_m": mix_with_m})


# ---------------------------------------------------------------------------
# Local approximate star-convexity

@dataclass
class LocalProbeResult:
    radius: float
    report: CertificateReport
    radii_tested: list

    def to_dict(self):
        return {"radius": self.radius, "report": self.report.to_dict(),
                "radii_tested": self.radii_tested}


def _unit_ball(rng, n, d, kind):
    if kind == "sup":
        return rng.uniform(-1.0, 1.0, (n, d))
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random((n, 1)) ** (1.0 / d)


def local_star_convexity_probe(model, x0, epsilon, sampler=None, tol=DEFAULT_TOL,
                               max_radius=None, min_radius=None, iterations=30):
    """Largest tested ball radius around ``x0`` on which the local inequality holds.

    The local inequality is

        Phi((1-l)x + m l y) <= (1-l)Phi(x) + m l Phi(y) + epsilon l (1-l) |x - y|

    for sampled x, y in the ball (intersected with the box).  The radius is
    located by bisection (in log radius) between ``min_radius`` and
    ``max_radius``; 0 is
    returned when even ``min_radius`` fails.
    """
    sampler = sampler or Sampler()
    x0 = as_vector(x0)
    lo, hi = box_arrays(model.box)
    if x0.size != model.dim or np.any(x0 <= lo) or np.any(x0 >= hi):
        raise InputError("x0 must be an interior point of the domain box")
    if max_radius is None:
        max_radius = float(np.max(hi - lo)) / 2
    if min_radius is None:
        min_radius = max_radius * 1e-6
    n = max(sampler.n_random, 1)
    rng = derive_rng(sampler.seed, "local-probe")
    U = _unit_ball(rng, n, model.dim, model.norm)
    V = _unit_ball(rng, n, model.dim, model.norm)
    L = np.clip(rng.random(n), 1e-12, 1 - 1e-12)
    m = model.m

    def probe(r):
        X, Y = x0 + r * U, x0 + r * V
        keep = np.all((X >= lo) & (X <= hi) & (Y >= lo) & (Y <= hi), axis=1)
        X, Y, lam = X[keep], Y[keep], L[keep]
        tracker = MinTracker()
        try:
            mixed = (1 - lam)[:, None] * X + (m * lam)[:, None] * Y
            rhs = ((1 - lam) * model(X) + m * lam * model(Y)
                   + epsilon * lam * (1 - lam) * norm_rows(X - Y, model.norm))
            s = rhs - model(mixed)
        except EvaluationError as err:
            raise ConfigurationError(f"local probe: {err}",
                                     _triple(X, Y, lam, err.index)) from err
        tracker.update(s, lambda i: _triple(X, Y, lam, i))
        return tracker

    tested = []
    config = {"x0": x0.tolist(), "epsilon": epsilon, "m": m, "tol": tol,
              "samples": n, "seed": sampler.seed, "max_radius": max_radius,
              "min_radius": min_radius}

    def ok(tr):
        return tr.count == 0 or tr.worst >= -tol

    top = probe(max_radius)
    tested.append(max_radius)
    if ok(top):
        return LocalProbeResult(max_radius, _finish("local", top, tol, config), tested)
    bottom = probe(min_radius)
    tested.append(min_radius)
    if not ok(bottom):
        return LocalProbeResult(0.0, _finish("local", bottom, tol, config), tested)
    good, bad, best = min_radius, max_radius, bottom
    for _ in range(iterations):
        mid = math.sqrt(good * bad)
        tr = probe(mid)
        tested.append(mid)
        if ok(tr):
            good, best = mid, tr
        else:
            bad = mid
    return LocalProbeResult(good, _finish("local", best, tol, config), tested)
