import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opertone.errors import CampaignError, DomainError, PreconditionError, ValidationError
from opertone.repfun import parse_spec, random_certified
from opertone.sampler import SampleConfig, make_rng, rand_hermitian, rand_pd, rand_psd
from opertone.verify import (
    CHECKS,
    Margin,
    ToneBranch,
    check_branch,
    check_derivative_sign,
    check_pick,
    check_sandwich,
    check_thm43,
    counterexample_search,
    expected_found,
    register_check,
    run_campaign,
    sandwich_indices,
    sector_membership,
    sign_flip_identity,
    verdict_for,
)
from opertone.verify.checks import _margin

EXP = parse_spec("exp on (-1,1)")


@given(st.integers(1, 64))
def test_tone_table_matches_written_statements(k):
    t = ToneBranch(k)
    if k % 4 == 2:
        kp = (k + 2) // 4
        assert 4 * kp - 2 == k and (t.branch, t.part, t.sense, t.truncation) == ("B1", "re", "le", 2 * kp - 2)
    elif k % 4 == 0:
        kp = k // 4
        assert 4 * kp == k and (t.branch, t.part, t.sense, t.truncation) == ("B2", "re", "ge", 2 * kp - 1)
    elif k % 4 == 1:
        kp = (k + 3) // 4
        assert 4 * kp - 3 == k and (t.branch, t.part, t.sense, t.truncation) == ("B3", "im", "ge", 2 * kp - 2)
    else:
        kp = (k + 1) // 4
        assert 4 * kp - 1 == k and (t.branch, t.part, t.sense, t.truncation) == ("B4", "im", "le", 2 * kp - 1)
    assert t.max_order == max(k - 2, 0)


@pytest.mark.parametrize("bad", [0, -3, 1.5])
def test_tone_rejects_bad_k(bad):
    with pytest.raises(ValidationError):
        ToneBranch(bad)


@given(st.floats(-0.9, 0.9), st.floats(0.01, 3.0), st.integers(1, 12))
@settings(max_examples=80, deadline=None)
def test_branch_on_scalars_matches_cosine_sine_series(a, b, k):
    # n = 1 with exp: Re e^(a+ib) = e^a cos b, Im = e^a sin b, and the
    # partial sums are e^a times the truncated cosine / sine series
    t = ToneBranch(k)
    K = t.truncation
    if t.part == "re":
        lhs = math.exp(a) * math.cos(b)
        rhs = math.exp(a) * sum((-1) ** m * b ** (2 * m) / math.factorial(2 * m) for m in range(K + 1))
    else:
        lhs = math.exp(a) * math.sin(b)
        rhs = math.exp(a) * sum((-1) ** (m - 1) * b ** (2 * m - 1) / math.factorial(2 * m - 1) for m in range(1, K + 1))
    expect = rhs - lhs if t.sense == "le" else lhs - rhs
    got = check_branch(EXP, t, np.array([[a]]), np.array([[b]])).value
    assert got == pytest.approx(expect, abs=1e-12 * (1 + abs(rhs) + abs(lhs)))


def test_margin_normalization_and_identity(rng):
    H = rand_hermitian(SampleConfig(4), rng)
    m = _margin(H, H)
    assert m.normalized == pytest.approx(m.value / (1 + m.scale))
    assert sign_flip_identity(m) < 1e-14
    assert Margin(-1.0, 0.0).passes(2.0) and not Margin(-1.0, 0.0).passes(0.5)


@pytest.mark.parametrize(
    "margins,verdict",
    [([0.1, 0.0], "pass"), ([-5e-9], "pass"), ([-5e-8], "inconclusive"), ([-1e-6], "refuted"), ([None], "inconclusive"), ([], "inconclusive")],
)
def test_verdict_thresholds(margins, verdict):
    assert verdict_for(margins, 1e-8) == verdict


def test_derivative_sign_scalar_and_domain():
    # every scalar derivative of exp is positive; A must stay inside the domain
    A = np.array([[0.0]])
    B = np.array([[1.0]])
    assert check_derivative_sign(EXP, 1, A, B).value > 0
    with pytest.raises(DomainError):
        check_derivative_sign(EXP, 1, np.array([[2.0]]), B)


def test_branch_requires_psd_direction(rng):
    f = random_certified("ktone", seed=1, k=3)
    A = np.zeros((2, 2))
    with pytest.raises(PreconditionError):
        check_branch(f, ToneBranch(3), A, -np.eye(2))
    # Re branches accept a general Hermitian direction on request
    check_branch(random_certified("ktone", seed=1, k=2), ToneBranch(2), A, -np.eye(2) * 0.3, general_b=True)


def test_pick_positive_for_monotone(rng):
    f = random_certified("monotone", seed=2)
    X = rand_hermitian(SampleConfig(3), rng) + 1j * rand_pd(SampleConfig(3), rng)
    assert check_pick(f, X).value > 0


def test_half_plane_bounds_report_sides(rng):
    f = random_certified("decreasing", seed=2)
    X = rand_pd(SampleConfig(3), rng) + 1j * rand_hermitian(SampleConfig(3), rng)
    out = check_thm43(f, X, 2)
    assert set(out) >= {"lower", "upper"}
    assert all(m is None or m.passes() for m in out.values())


def test_sandwich_indices_and_check(rng):
    idx = sandwich_indices(2, "monotone")
    assert idx["re_lower"] == 2 and idx["re_upper"] == 3
    f = parse_spec("pow 0.5 on (0,inf)")
    A = rand_pd(SampleConfig(3, margin=0.2), rng) + np.eye(3)
    B = 0.5 * rand_psd(SampleConfig(3), rng)
    out = check_sandwich(f, 1, A, B)
    assert all(m.passes() for m in out.values() if m is not None)


@given(st.floats(0.01, 0.99), st.sampled_from([0.25, 0.5, 0.75, 1.0]))
def test_sector_membership_on_scalars(frac, p):
    theta = frac * math.pi
    if abs(theta - p * math.pi) < 1e-9:
        return
    z = np.array([[complex(math.cos(theta), math.sin(theta))]])
    inside, _ = sector_membership(z, p)
    assert inside == (theta < p * math.pi)
    inside_conj, _ = sector_membership(z.conj(), p, cone=-1)
    assert inside_conj == inside


def test_campaign_is_deterministic_across_jobs():
    f = random_certified("ktone", seed=9, k=2)
    a = run_campaign("branch", f, 25, SampleConfig(3, seed=5), options={"tone": 2})
    b = run_campaign("branch", f, 25, SampleConfig(3, seed=5), options={"tone": 2}, jobs=4)
    assert a.to_json() == b.to_json() and a.verdict == "pass"
    assert a.cross_checks["count"] == 2


def test_campaign_validates_options():
    f = random_certified("ktone", seed=9, k=2)
    with pytest.raises(ValidationError):
        run_campaign("branch", f, 5, SampleConfig(2))
    with pytest.raises(ValidationError):
        run_campaign("nope", f, 5, SampleConfig(2))
    with pytest.raises(ValidationError):
        run_campaign("sector", random_certified("monotone", seed=1), 5, SampleConfig(2), options={"p": 2.0})


def test_campaign_aborts_on_engine_failures():
    def broken(f, ctx, rng):
        raise DomainError("synthetic failure")

    register_check("_broken", broken)
    try:
        with pytest.raises(CampaignError):
            run_campaign("_broken", EXP, 10, SampleConfig(2))
    finally:
        CHECKS.pop("_broken")


def test_cross_check_mismatch_downgrades_pass():
    def flaky(f, ctx, rng):
        return {"x": Margin(1.0 if ctx.path == "auto" else 0.5, 0.0)}

    register_check("_flaky", flaky, uses_engine=False)
    try:
        rep = run_campaign("_flaky", EXP, 3, SampleConfig(2))
        assert rep.cross_checks["mismatches"] == 1 and rep.verdict == "inconclusive"
    finally:
        CHECKS.pop("_flaky")


@pytest.mark.parametrize("kind,p", [("remark35_im", 1.0), ("remark35_im", 3.0), ("remark35_re", 0.7), ("remark35_re", 2.5), ("remark48", None)])
def test_counterexample_results_match_scalar_analysis(kind, p):
    res = counterexample_search(kind, p, budget=512, seed=1)
    assert res.found == expected_found(kind, p)
    if res.found and kind != "remark48":
        a, b = res.witness["a"], res.witness["b"]
        w = complex(a, b) ** p
        assert (w.imag < 0) if kind == "remark35_im" else (w.real > a**p)
