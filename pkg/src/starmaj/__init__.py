"""Sampled certificates for m-star-convexity and m-majorization inequalities."""

from .calculus import (GradientSpec, critical_point_bound_check,
                       differential_isotonicity_check, gateaux, gradient,
                       gradient_inequality_check, hessian, isotonicity_of_function_check,
                       mp_gradient_inequality_check)
from .errors import (ConfigurationError, EvaluationError, GenerationError,
                     HypothesisViolation, InputError, ParseError, PreconditionError,
                     StarmajError)
from .expr import differentiate, evaluate, parse, to_text
from .funclass import (CertificateReport, FunctionModel, ModulusSpec,
                       delta_star_convexity_certificate, local_star_convexity_probe,
                       midpoint_convexity_check, mocanu_bracketing, mocanu_m_estimate,
                       mp_mean, mp_star_convexity_certificate, perspective,
                       star_convexity_certificate)
from .hlp import HLPReport, catalog_function, perturbed_hlp_check, verify_hlp
from .measures import (DiscreteMeasure, RelationKind, check_majorization,
                       generate_instance)
from .order import cone_leq, is_monotone_string
from .sampling import Sampler

__version__ = "0.1.0"

__all__ = [
    "GradientSpec",
    "critical_point_bound_check",
    "differential_isotonicity_check",
    "gateaux",
    "gradient",
    "gradient_inequality_check",
    "hessian",
    "isotonicity_of_function_check",
    "mp_gradient_inequality_check",
    "ConfigurationError",
    "EvaluationError",
    "GenerationError",
    "HypothesisViolation",
    "InputError",
    "ParseError",
    "PreconditionError",
    "StarmajError",
    "differentiate",
    "evaluate",
    "parse",
    "to_text",
    "CertificateReport",
    "FunctionModel",
    "ModulusSpec",
    "delta_star_convexity_certificate",
    "local_star_convexity_probe",
    "midpoint_convexity_check",
    "mocanu_bracketing",
    "mocanu_m_estimate",
    "mp_mean",
    "mp_star_convexity_certificate",
    "perspective",
    "star_convexity_certificate",
    "HLPReport",
    "catalog_function",
    "perturbed_hlp_check",
    "verify_hlp",
    "DiscreteMeasure",
    "RelationKind",
    "check_majorization",
    "generate_instance",
    "cone_leq",
    "is_monotone_string",
    "Sampler",
]
