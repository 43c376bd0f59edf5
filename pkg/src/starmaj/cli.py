"""Command-line front end.

Exit codes: 0 pass / holds, 1 verified negative, 2 usage or input error.
Reports are JSON (default) or flat ``key,value`` CSV and contain no
timestamps, so a fixed seed yields byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import gallery
from .calculus import (GradientSpec, critical_point_bound_check,
                       differential_isotonicity_check, gradient_inequality_check,
                       isotonicity_of_function_check, mp_gradient_inequality_check)
from .errors import (ConfigurationError, HypothesisViolation, InputError,
                     PreconditionError, StarmajError)
from .funclass import (DEFAULT_TOL, FunctionModel, delta_star_convexity_certificate,
                       local_star_convexity_probe, mocanu_bracketing, mocanu_m_estimate,
                       mp_star_convexity_certificate, star_convexity_certificate)
from .hlp import HLP_TOL, catalog_function, verify_hlp
from .measures import RelationKind, check_majorization, generate_instance, load_measure
from .sampling import Sampler, derive_rng

EXIT_PASS, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


# ---------------------------------------------------------------------------
# Output

def _plain(obj):
    """Convert numpy scalars and arrays, and non-finite floats, to JSON values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def flatten(obj, prefix=""):
    """``(key, value)`` rows with dotted keys; list items are indexed."""
    if isinstance(obj, dict):
        items = obj.items()
    elif isinstance(obj, list):
        items = ((str(i), v) for i, v in enumerate(obj))
    else:
        return [(prefix, obj)]
    rows = []
    for k, v in items:
        key = f"{prefix}.{k}" if prefix else k
        if isinstance(v, (dict, list)) and v:
            rows.extend(flatten(v, key))
        else:
            rows.append((key, v))
    return rows


def _csv_value(v):
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v)
    return str(v)


def render(report, fmt):
    report = _plain(report)
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in flatten(report):
        writer.writerow([key, _csv_value(value)])
    return buf.getvalue()


def emit(report, args):
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(args, result, **config):
    return {"command": args.command, "seed": args.seed, "config": config, "result": result}


# ---------------------------------------------------------------------------
# Inputs

def load_function(ref, m=None):
    """A function model from a JSON file, a gallery name or ``catalog:NAME``."""
    if os.path.exists(ref):
        try:
            with open(ref) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as err:
            raise InputError(f"{ref}: invalid JSON: {err}") from err
        model = FunctionModel.from_dict(data, name=os.path.basename(ref))
    else:
        try:
            model = gallery.named_function(ref)
        except KeyError:
            raise InputError(f"{ref!r} is neither a file nor a known function "
                             f"({', '.join(gallery.FUNCTION_NAMES)})") from None
    return model if m is None else model.with_m(m)


def _sampler(args):
    kw = {"seed": args.seed}
    if getattr(args, "grid_points", None) is not None:
        kw["grid_points"] = args.grid_points
    if getattr(args, "n_random", None) is not None:
        kw["n_random"] = args.n_random
    return Sampler(**kw)


def _tol(args, default):
    return default if args.tol is None else args.tol


def _exit_for(passed):
    return EXIT_PASS if passed else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# Subcommands

def cmd_check_majorization(args):
    mu, nu = load_measure(args.mu), load_measure(args.nu)
    verdict = check_majorization(mu, nu, args.m, args.kind, _tol(args, 1e-9))
    emit(_envelope(args, verdict.to_dict(), mu=args.mu, nu=args.nu, m=args.m,
                   kind=args.kind, tol=_tol(args, 1e-9)), args)
    return _exit_for(verdict.holds)


def cmd_certify(args):
    model = load_function(args.function, args.m)
    sampler, tol = _sampler(args), _tol(args, DEFAULT_TOL)
    if args.mode == "star":
        result = star_convexity_certificate(model, sampler, tol)
    elif args.mode == "delta-star":
        result = delta_star_convexity_certificate(model, args.delta, sampler, tol)
    elif args.mode == "mp-star":
        result = mp_star_convexity_certificate(model, args.p, sampler, tol, args.mix_with_m)
    else:
        x0 = args.x0 if args.x0 is not None else model.box.mean(axis=1).tolist()
        probe = local_star_convexity_probe(model, x0, args.epsilon, sampler, tol)
        emit(_envelope(args, probe.to_dict(), function=model.to_dict(), mode=args.mode), args)
        return _exit_for(probe.radius > 0)
    emit(_envelope(args, result.to_dict(), function=model.to_dict(), mode=args.mode), args)
    return _exit_for(result.passed)


def cmd_estimate_m(args):
    model = load_function(args.function)
    if model.dim != 1:
        raise InputError("estimate-m needs a one-dimensional function")
    est = mocanu_m_estimate(model, args.grid)
    bracket = mocanu_bracketing(model, est, _sampler(args), _tol(args, DEFAULT_TOL))
    if args.expect is not None and abs(est.value - args.expect) > args.expect_tol:
        est.note = (est.note + "; " if est.note else "") + (
            f"discrepancy: estimate differs from {args.expect} by "
            f"{abs(est.value - args.expect):.3g}")
    emit(_envelope(args, {"estimate": est.to_dict(), "bracketing": bracket},
                   function=model.to_dict(), grid=args.grid), args)
    return _exit_for(bracket["holds"])


def cmd_gradient_check(args):
    model = load_function(args.function, args.m)
    sampler, tol = _sampler(args), _tol(args, DEFAULT_TOL)
    spec = GradientSpec(args.gradient)
    if args.p is None:
        rep = gradient_inequality_check(model, sampler, spec, tol)
    else:
        rep = mp_gradient_inequality_check(model, args.p, sampler, spec, tol)
    result = {"gradient_inequality": rep.to_dict()}
    passed = rep.passed
    if args.critical:
        crit = critical_point_bound_check(model, sampler, tol=tol)
        result["critical_point_bound"] = crit.to_dict()
        passed = passed and crit.passed
    result["passed"] = passed
    emit(_envelope(args, result, function=model.to_dict(), gradient=args.gradient), args)
    return _exit_for(passed)


def cmd_isotonicity_check(args):
    model = load_function(args.function)
    sampler, tol = _sampler(args), _tol(args, DEFAULT_TOL)
    points = [args.point[i:i + model.dim] for i in range(0, len(args.point), model.dim)] \
        if args.point else None
    if points and len(points[-1]) != model.dim:
        raise InputError(f"--point needs {model.dim} coordinates per point")
    if args.function_isotone:
        rep = isotonicity_of_function_check(model, sampler, tol)
        result, passed = rep.to_dict(), rep.passed
    else:
        rep = differential_isotonicity_check(model, sampler, tol, points=points)
        result, passed = rep.to_dict(), rep.passed
    emit(_envelope(args, result, function=model.to_dict()), args)
    return _exit_for(passed)


def _sweep_function(ref, d, m):
    if ref.startswith("catalog:"):
        return catalog_function(ref.split(":", 1)[1], d, m)
    model = load_function(ref, m)
    if model.dim != d:
        raise InputError("non-catalog functions need --d equal to their dimension")
    return model


def _sweep(args):
    kind = RelationKind(args.kind)
    ms = [float(v) for v in args.m_values.split(",")]
    tol = _tol(args, HLP_TOL)
    rows, failures = [], []
    for i in range(args.count):
        rng = derive_rng(args.seed, f"sweep-{i}")
        n = args.n if args.n is not None else int(rng.integers(1, 7))
        d = args.d if args.d is not None else int(rng.integers(1, 5))
        m = ms[int(rng.integers(len(ms)))]
        if kind in (RelationKind.classic, RelationKind.classic_weak):
            d, m = 1, 1.0
        seed_i = int(rng.integers(2**31))
        model = _sweep_function(args.fn, d, m)
        mu, nu = generate_instance(kind, n, d, m, seed_i, model.box)
        rep = verify_hlp(mu, nu, model, kind, tol=tol, advisories=False)
        terms = rep.abel.telescoping_terms
        rows.append({"slack": rep.slack, "scaled_slack": rep.slack / rep.scale,
                     "boundary": abs(rep.abel.boundary_term) / rep.scale,
                     "telescoping": (min(terms) / rep.scale) if terms else math.inf})
        if not rep.passed:
            failures.append({"index": i, "n": n, "d": d, "m": m, "seed": seed_i,
                             "slack": rep.slack})
    summary = {"count": args.count, "passed": args.count - len(failures),
               "min_slack": min(r["slack"] for r in rows),
               "min_scaled_slack": min(r["scaled_slack"] for r in rows),
               "max_scaled_abs_boundary": max(r["boundary"] for r in rows),
               "min_scaled_telescoping": min(r["telescoping"] for r in rows),
               "failures": failures}
    emit(_envelope(args, summary, kind=kind.value, fn=args.fn, m_values=ms, tol=tol), args)
    return _exit_for(not failures)


def cmd_verify_hlp(args):
    if args.count < 1:
        raise InputError("--count must be positive")
    if args.generate:
        return _sweep(args)
    if not (args.mu and args.nu):
        raise InputError("verify-hlp needs two measure files or --generate")
    mu, nu = load_measure(args.mu), load_measure(args.nu)
    m = args.m if args.m is not None else None
    if args.fn.startswith("catalog:"):
        model = catalog_function(args.fn.split(":", 1)[1], mu.dim, 1.0 if m is None else m)
    else:
        model = load_function(args.fn, m)
    try:
        rep = verify_hlp(mu, nu, model, args.kind, tol=_tol(args, HLP_TOL),
                         advisory_sampler=Sampler(grid_points=0, n_random=400, seed=args.seed))
    except PreconditionError as err:
        emit(_envelope(args, {"passed": False, "failed_condition": err.condition,
                              "message": str(err)}, kind=args.kind), args)
        print(f"relation fails: condition '{err.condition}'", file=sys.stderr)
        return EXIT_NEGATIVE
    emit(_envelope(args, rep.to_dict(), function=model.to_dict(), kind=args.kind), args)
    return _exit_for(rep.passed)


def cmd_gallery(args):
    names = list(gallery.ENTRIES)
    if args.list or not args.run:
        expectations = gallery.load_expectations()
        emit({"entries": [{"name": n, "description": expectations.get(n, {}).get(
            "description", "")} for n in names]}, args)
        return EXIT_PASS
    selected = names if args.run == ["all"] else args.run
    unknown = [n for n in selected if n not in gallery.ENTRIES]
    if unknown:
        raise InputError(f"unknown gallery entries: {', '.join(unknown)}")
    expectations = gallery.load_expectations()
    reports = [gallery.run_entry(n, args.seed, expectations) for n in selected]
    ok = all(r["reproduced"] for r in reports)
    emit({"command": "gallery", "seed": args.seed, "reproduced": ok, "entries": reports}, args)
    return _exit_for(ok)


# ---------------------------------------------------------------------------
# Parser

def _common():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--tol", type=float, default=None, help="pass tolerance")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    return p


def _sampler_flags(p):
    p.add_argument("--grid-points", type=int, default=None, help="grid points per axis")
    p.add_argument("--n-random", type=int, default=None, help="random samples")


def build_parser():
    common = _common()
    parser = argparse.ArgumentParser(prog="starmaj", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-majorization", parents=[common],
                       help="decide an m-majorization relation between two measures")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--kind", default="mL_down", choices=[k.value for k in RelationKind])
    p.set_defaults(handler=cmd_check_majorization)

    p = sub.add_parser("certify", parents=[common], help="sampled star-convexity certificate")
    p.add_argument("function", help="function JSON file, gallery name or catalog:NAME")
    p.add_argument("--mode", choices=("star", "mp-star", "delta-star", "local"), default="star")
    p.add_argument("--m", type=float, default=None, help="override the model's m")
    p.add_argument("--p", type=float, default=1.0, help="power-mean order (mp-star)")
    p.add_argument("--mix-with-m", action="store_true",
                   help="mp-star: scale y by m inside the argument")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--x0", type=float, nargs="+", default=None, help="centre (local)")
    p.add_argument("--epsilon", type=float, default=0.01, help="local slope allowance")
    _sampler_flags(p)
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("estimate-m", parents=[common],
                       help="difference-quotient estimate of m with bracketing check")
    p.add_argument("function")
    p.add_argument("--grid", type=int, default=2000)
    p.add_argument("--expect", type=float, default=None,
                   help="reference value; a note is added when off by more than --expect-tol")
    p.add_argument("--expect-tol", type=float, default=0.02)
    _sampler_flags(p)
    p.set_defaults(handler=cmd_estimate_m)

    p = sub.add_parser("gradient-check", parents=[common],
                       help="gradient inequality (and optional critical-point bound)")
    p.add_argument("function")
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--p", type=float, default=None, help="power-mean form of order p")
    p.add_argument("--gradient", choices=("symbolic", "finite_difference"), default="symbolic")
    p.add_argument("--critical", action="store_true")
    _sampler_flags(p)
    p.set_defaults(handler=cmd_gradient_check)

    p = sub.add_parser("isotonicity-check", parents=[common],
                       help="isotonicity of the differential (or of the function)")
    p.add_argument("function")
    p.add_argument("--point", type=float, nargs="+", default=None,
                   help="extra points, coordinates concatenated")
    p.add_argument("--function-isotone", action="store_true",
                   help="check Phi itself rather than its differential")
    _sampler_flags(p)
    p.set_defaults(handler=cmd_isotonicity_check)

    p = sub.add_parser("verify-hlp", parents=[common],
                       help="evaluate the majorization inequality on one pair or a sweep")
    p.add_argument("mu", nargs="?")
    p.add_argument("nu", nargs="?")
    p.add_argument("--fn", default="catalog:exp-sum",
                   help="function JSON file, gallery name or catalog:NAME")
    p.add_argument("--kind", default="mL_down", choices=[k.value for k in RelationKind])
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--generate", action="store_true", help="run a generated sweep")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--n", type=int, default=None, help="support size (default 1..6)")
    p.add_argument("--d", type=int, default=None, help="dimension (default 1..4)")
    p.add_argument("--m-values", default="0.5,0.9,1.0")
    p.set_defaults(handler=cmd_verify_hlp)

    p = sub.add_parser("gallery", parents=[common], help="list or run the worked examples")
    p.add_argument("--list", action="store_true")
    p.add_argument("--run", nargs="+", default=None, metavar="NAME", help="entry names or all")
    p.set_defaults(handler=cmd_gallery)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except PreconditionError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NEGATIVE
    except HypothesisViolation as err:
        print(f"hypothesis violated: {err}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (ConfigurationError, InputError, StarmajError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
