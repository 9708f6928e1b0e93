"""Scalar function zoo: builtins, certified representations, closed-form derivatives."""

from .certified import log1p_monotone_rep, random_certified
from .closed_form import (
    ResolventFactorization,
    closed_form_derivatives,
    exact_frechet_atom,
    has_closed_form,
    resolvent_factorization,
)
from .parse import format_spec, parse_spec, spec_from_json, spec_to_json
from .spec import (
    Builtin,
    ClassTags,
    Convex,
    Decreasing,
    FunctionSpec,
    Interval,
    KTone,
    Monotone,
    Rescaled,
    affine_rescale,
    eval_scalar,
)

__all__ = [
    "Builtin",
    "ClassTags",
    "Convex",
    "Decreasing",
    "FunctionSpec",
    "Interval",
    "KTone",
    "Monotone",
    "Rescaled",
    "ResolventFactorization",
    "affine_rescale",
    "closed_form_derivatives",
    "eval_scalar",
    "exact_frechet_atom",
    "format_spec",
    "has_closed_form",
    "log1p_monotone_rep",
    "parse_spec",
    "random_certified",
    "resolvent_factorization",
    "spec_from_json",
    "spec_to_json",
]
