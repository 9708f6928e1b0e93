"""Analytic functional calculus, Frechet derivatives and operator k-tone checks."""

from .errors import (
    AccuracyError,
    CampaignError,
    DomainError,
    EigenError,
    GeometryError,
    OpertoneError,
    PreconditionError,
    SamplerError,
    SpecConstraintError,
    SpecSyntaxError,
    ValidationError,
)
from .frechet import frechet, frechet_series, taylor_sums
from .funcalc import analytic_calc, calc_both, calc_hermitian
from .matcore import psd_margin, re_im_parts
from .repfun import FunctionSpec, Interval, parse_spec, random_certified
from .sampler import SampleConfig
from .verify import ToneBranch, counterexample_search, run_campaign

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "CampaignError",
    "DomainError",
    "EigenError",
    "FunctionSpec",
    "GeometryError",
    "Interval",
    "OpertoneError",
    "PreconditionError",
    "SampleConfig",
    "SamplerError",
    "SpecConstraintError",
    "SpecSyntaxError",
    "ToneBranch",
    "ValidationError",
    "analytic_calc",
    "calc_both",
    "calc_hermitian",
    "counterexample_search",
    "frechet",
    "frechet_series",
    "parse_spec",
    "psd_margin",
    "random_certified",
    "re_im_parts",
    "run_campaign",
    "taylor_sums",
]
