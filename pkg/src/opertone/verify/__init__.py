"""Falsifiable checks of the operator inequalities, campaigns and counterexample searches."""

from .campaign import CHECKS, CheckReport, register_check, replay_trial, run_campaign, verdict_for
from .checks import (
    Margin,
    ProbeReport,
    SectorResult,
    check_branch,
    check_derivative_sign,
    check_pick,
    check_sandwich,
    check_sector_map,
    check_taylor_remainder,
    check_thm43,
    expansion_order_probe,
    sandwich_indices,
    sector_membership,
    sign_flip_identity,
)
from .counterexamples import SearchResult, counterexample_search, expected_found
from .tones import SectorParams, ToneBranch

__all__ = [
    "CHECKS",
    "CheckReport",
    "Margin",
    "ProbeReport",
    "SearchResult",
    "SectorParams",
    "SectorResult",
    "ToneBranch",
    "check_branch",
    "check_derivative_sign",
    "check_pick",
    "check_sandwich",
    "check_sector_map",
    "check_taylor_remainder",
    "check_thm43",
    "counterexample_search",
    "expansion_order_probe",
    "expected_found",
    "register_check",
    "replay_trial",
    "run_campaign",
    "sandwich_indices",
    "sector_membership",
    "sign_flip_identity",
    "verdict_for",
]
