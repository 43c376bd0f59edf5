"""Named functions and a gallery of reproducible worked examples.

Each gallery entry computes a flat dictionary of observations; the expected
outcomes live in ``data/gallery.json`` and are compared by
:func:`check_expectations`.  An expectation is either a literal (bool or
string, compared for equality) or a ``[lo, hi]`` range for a number.
"""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .calculus import (GradientSpec, differential_isotonicity_check, gateaux,
                       gradient, hessian, hessian_min_entries,
                       critical_point_bound_check, gradient_inequality_check,
                       mp_gradient_inequality_check)
from .funclass import (FunctionModel, mocanu_bracketing, mocanu_m_estimate,
                       midpoint_convexity_check, mp_mean, mp_star_convexity_certificate,
                       perspective, star_convexity_certificate)
from .hlp import catalog_function, verify_hlp
from .measures import DiscreteMeasure, check_majorization
from .order import is_monotone_string
from .sampling import Sampler, derive_rng, uniform

F_TEXT = "x0^4 - 5*x0^3 + 9*x0^2 - 5*x0"
GAMMA_TEXT = "-2*x0^3 + 5*x0^2 + 6*x0"
UPSILON_TEXT = "-2*x0^3/x1^2 + 5*x0^2/x1 + 6*x0"


def named_function(name):
    """Function models referenced by name from the command line."""
    if name.startswith("catalog:"):
        return catalog_function(name.split(":", 1)[1], 1)
    table = {
        "mocanu-f": lambda: FunctionModel(F_TEXT, 1, [(0, 10)], 16 / 17, name="mocanu-f"),
        "gamma": lambda: FunctionModel(GAMMA_TEXT, 1, [(-10, 1)], 27 / 28, name="gamma"),
        "gamma-wide": lambda: FunctionModel(GAMMA_TEXT, 1, [(-50, 1)], 27 / 28,
                                            name="gamma-wide"),
        "upsilon": lambda: FunctionModel(UPSILON_TEXT, 2, [(-5, 1), (1, 5)], 27 / 28,
                                         name="upsilon"),
        "perspective-f": lambda: perspective(
            FunctionModel(F_TEXT, 1, [(0, 5)], 16 / 17, name="mocanu-f"), (0.5, 5)),
        "square": lambda: FunctionModel("x0^2", 1, [(-5, 5)], 1.0, name="square"),
        "sqrt-square": lambda: FunctionModel("sqrt(x0^2 + 1)", 1, [(-2, 2)], 1.0,
                                             name="sqrt-square"),
        "exp-square": lambda: FunctionModel("exp(x0^2)", 1, [(-1, 1)], 1.0, name="exp-square"),
        "exp-sum": lambda: catalog_function("exp-sum", 2, 1.0),
    }
    if name not in table:
        raise KeyError(name)
    return table[name]()


FUNCTION_NAMES = ("mocanu-f", "gamma", "gamma-wide", "upsilon", "perspective-f", "square",
                  "sqrt-square", "exp-square", "exp-sum")


# ---------------------------------------------------------------------------
# Closed forms used as independent references for the two-variable example

def upsilon_gradient_formula(x, y):
    return np.stack([(-6 * x**2 + 10 * x * y + 6 * y**2) / y**2,
                     x**2 * (4 * x - 5 * y) / y**3], axis=-1)


def upsilon_hessian_formula(x, y):
    k = 6 * x - 5 * y
    return np.stack([np.stack([-2 / y**2 * k, 2 * x / y**3 * k], axis=-1),
                     np.stack([2 * x / y**3 * k, -2 * x**2 / y**4 * k], axis=-1)], axis=-2)


def _upsilon_points(seed, n=50):
    return uniform([(-5, 1), (1, 5)], n, derive_rng(seed, "upsilon-points"))


# ---------------------------------------------------------------------------
# Entries

def _cert(report):
    return {"passed": report.passed, "worst_slack": report.worst_slack,
            "samples": report.samples_tested, "has_witness": report.witness is not None,
            "witness": report.witness}


def entry_mocanu_f(seed):
    return _cert(star_convexity_certificate(named_function("mocanu-f"), Sampler(seed=seed)))


def entry_mocanu_f_m1(seed):
    return _cert(star_convexity_certificate(named_function("mocanu-f").with_m(1.0),
                                            Sampler(seed=seed)))


def entry_gamma(seed):
    return _cert(star_convexity_certificate(named_function("gamma"), Sampler(seed=seed)))


def entry_gamma_concavity(seed):
    model = FunctionModel(GAMMA_TEXT, 1, [(5 / 6, 1)], 1.0)
    return _cert(midpoint_convexity_check(model))


def _estimate(model, seed):
    est = mocanu_m_estimate(model, grid=2000)
    br = mocanu_bracketing(model, est, Sampler(seed=seed))
    return {"value": est.value, "raw": est.raw, "witness": est.witness,
            "bracketing": br["holds"], "upper_marginal": br.get("upper_marginal", True),
            "lower_worst_slack": br["lower_worst_slack"]}


def entry_estimate_f(seed):
    return _estimate(named_function("mocanu-f"), seed)


def entry_estimate_gamma(seed):
    return _estimate(named_function("gamma-wide"), seed)


def entry_upsilon_gradient(seed):
    model = named_function("upsilon")
    P = _upsilon_points(seed)
    G = gradient(model, P)
    ref = upsilon_gradient_formula(P[:, 0], P[:, 1])
    fd = np.array([[gateaux(model, p, e, GradientSpec("finite_difference"))
                    for e in np.eye(2)] for p in P])
    return {"max_error": float(np.max(np.abs(G - ref))),
            "max_fd_relative_error": float(np.max(np.abs(G - fd) / (1 + np.abs(G))))}


def entry_upsilon_hessian(seed):
    model = named_function("upsilon")
    P = _upsilon_points(seed)
    H = hessian(model, P)
    ref = upsilon_hessian_formula(P[:, 0], P[:, 1])
    return {"max_error": float(np.max(np.abs(H - ref)))}


def entry_upsilon_isotonicity(seed):
    model = named_function("upsilon")
    report = differential_isotonicity_check(model, Sampler(seed=seed), points=[[1.0, 1.0]])
    P = _upsilon_points(seed, 400)
    neg = P[6 * P[:, 0] - 5 * P[:, 1] < 0]
    mins, _ = hessian_min_entries(model, neg)
    diag = np.diagonal(hessian(model, neg), axis1=1, axis2=2)
    at11, _ = hessian_min_entries(model, [[1.0, 1.0]])
    off = hessian(model, [0.5, 1.5])[0, 1]
    return {"entrywise_passed": report.entrywise.passed,
            "direct_passed": report.direct.passed,
            "violation_at_1_1": bool(at11[0] < 0),
            "min_entry_at_1_1": float(at11[0]),
            "diagonal_nonnegative_where_6x_lt_5y": bool(np.all(diag >= 0)),
            "all_entries_nonnegative_where_6x_lt_5y": bool(np.all(mins >= 0)),
            "offdiagonal_at_0.5_1.5": float(off),
            "witness": report.entrywise.witness}


def entry_upsilon_star(seed):
    return _cert(star_convexity_certificate(named_function("upsilon"), Sampler(seed=seed)))


def entry_perspective_f(seed):
    model = named_function("perspective-f")
    out = _cert(star_convexity_certificate(model, Sampler(seed=seed)))
    rng = derive_rng(seed, "homogeneity")
    P = uniform(model.domain, 100, rng)
    s = rng.uniform(0.5, 2.0, (100, 1))
    lhs, rhs = model(s * P), s[:, 0] * model(P)
    out["homogeneity_max_rel_error"] = float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs))))
    return out


def entry_mp_means(seed):
    table = {}
    for p in (-math.inf, -1.0, 0.0, 1.0, 2.0, math.inf):
        table[f"M_{p}"] = mp_mean(4.0, 9.0, 0.5, p)
    vals = list(table.values())
    table["monotone_in_p"] = bool(all(a <= b + 1e-12 for a, b in zip(vals, vals[1:])))
    return table


def entry_measures_n3(seed):
    x, z = np.array([0.5, -0.25]), np.array([0.3, 0.2])
    lam = [1 / 3] * 3
    mu = DiscreteMeasure(lam, [x, x, x])
    nu = DiscreteMeasure(lam, [x, x + z, x - z])
    verdict = check_majorization(mu, nu, 1.0, "mL_down")
    model = catalog_function("exp-sum", 2, 1.0)
    report = verify_hlp(mu, nu, model, "mL_down")
    return {"holds": verdict.holds, "y_decreasing": is_monotone_string(nu.points, "decreasing"),
            "hlp_passed": report.passed, "hlp_slack": report.slack}


def entry_square_hlp(seed):
    mu = DiscreteMeasure([0.5, 0.5], [[2.0], [2.0]])
    nu = DiscreteMeasure([0.5, 0.5], [[3.0], [1.0]])
    model = FunctionModel("x0^2", 1, [(0, 4)], 1.0)
    r = verify_hlp(mu, nu, model, "classic")
    return {"lhs": r.lhs, "rhs": r.rhs, "slack": r.slack, "passed": r.passed}


def entry_mp_star(seed):
    sampler = Sampler(seed=seed)
    sq = mp_star_convexity_certificate(named_function("sqrt-square"), 2.0, sampler)
    lg = mp_star_convexity_certificate(named_function("exp-square"), 0.0, sampler)
    gsq = mp_gradient_inequality_check(named_function("sqrt-square"), 2.0, sampler)
    glg = mp_gradient_inequality_check(named_function("exp-square"), 0.0, sampler)
    return {"p2_sqrt_passed": sq.passed, "p0_exp_passed": lg.passed,
            "p2_gradient_passed": gsq.passed, "p0_gradient_passed": glg.passed}


def entry_gradient_f(seed):
    model = named_function("mocanu-f")
    g = gradient_inequality_check(model, Sampler(seed=seed))
    c = critical_point_bound_check(model, Sampler(seed=seed))
    return {"gradient_passed": g.passed, "gradient_worst_slack": g.worst_slack,
            "critical_passed": c.passed, "critical_points": c.config["critical_points"]}


ENTRIES = {
    "mocanu-f": entry_mocanu_f,
    "mocanu-f-m1": entry_mocanu_f_m1,
    "gamma": entry_gamma,
    "gamma-concavity": entry_gamma_concavity,
    "estimate-m-f": entry_estimate_f,
    "estimate-m-gamma": entry_estimate_gamma,
    "upsilon-gradient": entry_upsilon_gradient,
    "upsilon-hessian": entry_upsilon_hessian,
    "upsilon-isotonicity": entry_upsilon_isotonicity,
    "upsilon-star": entry_upsilon_star,
    "perspective-f": entry_perspective_f,
    "mp-means": entry_mp_means,
    "mp-star": entry_mp_star,
    "gradient-f": entry_gradient_f,
    "measures-n3": entry_measures_n3,
    "square-hlp": entry_square_hlp,
}


def load_expectations():
    text = resources.files("starmaj").joinpath("data/gallery.json").read_text()
    return json.loads(text)


def _matches(value, expected):
    if isinstance(expected, list) and len(expected) == 2 and not isinstance(expected[0], bool):
        lo = -math.inf if expected[0] is None else expected[0]
        hi = math.inf if expected[1] is None else expected[1]
        return isinstance(value, (int, float)) and lo <= value <= hi
    return value == expected


def check_expectations(observed, expected):
    """Names of expectation keys that ``observed`` does not reproduce."""
    return [key for key, exp in expected.items()
            if key not in observed or not _matches(observed[key], exp)]


def run_entry(name, seed=42, expectations=None):
    expectations = expectations if expectations is not None else load_expectations()
    known = expectations.get(name, {})
    observed = ENTRIES[name](seed)
    mismatches = check_expectations(observed, known.get("expect", {}))
    out = {"entry": name, "description": known.get("description", ""),
           "reproduced": not mismatches, "mismatches": mismatches,
           "observed": observed, "expect": known.get("expect", {})}
    if "note" in known:
        out["note"] = known["note"]
    return out
