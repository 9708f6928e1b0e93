"""Acceptance criteria, one test per criterion.

Tolerances are pinned at the stated values; instance sizes stay at desk
scale (n <= 6, m <= 4 for the engine comparison).
"""

import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from opertone.frechet import frechet
from opertone.funcalc.calc import analytic_calc, calc_both
from opertone.matcore import fro, re_im_parts, rel_diff
from opertone.repfun import FunctionSpec, KTone, Decreasing, log1p_monotone_rep, parse_spec, random_certified
from opertone.repfun.spec import MINUS_ONE_ONE, POSITIVE
from opertone.sampler import (
    SampleConfig,
    make_rng,
    rand_hermitian,
    rand_hermitian_in,
    rand_pd,
    rand_psd,
    rand_sector,
    trial_seed,
)
from opertone.verify import (
    check_sector_map,
    counterexample_search,
    expansion_order_probe,
    replay_trial,
    run_campaign,
)
from opertone.words import poly_word_sum

TAU = 1e-8
DIMS = (2, 3, 4, 5, 6)
BUILTINS = ("log on (0,inf)", "pow 0.5 on (0,inf)", "pow 0.3 on (0,inf)", "inv on (0,inf)", "exp on (-1,1)")

pytestmark = pytest.mark.acceptance


def _calc_spec(rng, i):
    j = i % 8
    if j < len(BUILTINS):
        return parse_spec(BUILTINS[j])
    return random_certified(("monotone", "decreasing", "convex")[j - len(BUILTINS)], rng=rng)


def _half_plane_instance(f, n, rng):
    # Re X pushed out of the domain so only the half-plane hypothesis holds
    A = rand_hermitian(SampleConfig(n, scale=3.0), rng)
    lo = np.linalg.eigvalsh(A)[0]
    A = A - (lo - (f.domain.a - 0.5)) * np.eye(n)
    return A + 1j * rand_pd(SampleConfig(n), rng)


def test_criterion_01_eigen_vs_contour():
    worst = {}
    for case, seed in (("strip", 101), ("upper_half", 102), ("lower_half", 103)):
        w = 0.0
        for i in range(200):
            n = DIMS[i % len(DIMS)]
            rng = make_rng(trial_seed(seed, i))
            f = _calc_spec(rng, i)
            if case == "strip":
                cfg = SampleConfig(n)
                X = rand_hermitian_in(cfg, f.domain, rng) + 1j * rand_hermitian(cfg, rng)
            else:
                X = _half_plane_instance(f, n, rng)
                if case == "lower_half":
                    X = X.conj().T
            both = calc_both(f, X)
            assert both["contour"].case == case
            assert both["eigen"] is not None, f"eigen path unavailable on instance {i}"
            w = max(w, both["rel_diff"])
        worst[case] = w
    assert all(v <= 1e-8 for v in worst.values()), worst


def test_criterion_02_three_engine_frechet():
    worst = {"contour-closed": 0.0, "contour-divided": 0.0, "divided-closed": 0.0}
    fd_ok = True
    for i in range(100):
        rng = make_rng(trial_seed(202, i))
        n = DIMS[i % len(DIMS)]
        cls = ("ktone", "monotone", "decreasing", "convex")[i % 4]
        f = random_certified(cls, k=1 + i % 6, rng=rng) if cls == "ktone" else random_certified(cls, rng=rng)
        cfg = SampleConfig(n, margin=0.1)
        A = rand_hermitian_in(cfg, f.domain, rng)
        B = rand_psd(cfg, rng) if i % 2 else rand_hermitian(cfg, rng)
        for m in range(5):
            c = frechet(f, A, B, m, "contour").value
            d = frechet(f, A, B, m, "divided").value
            cf = frechet(f, A, B, m, "closed").value
            worst["contour-closed"] = max(worst["contour-closed"], rel_diff(c, cf))
            worst["contour-divided"] = max(worst["contour-divided"], rel_diff(c, d))
            worst["divided-closed"] = max(worst["divided-closed"], rel_diff(d, cf))
            fd = frechet(f, A, B, m, "fd")
            fd_ok &= fro(fd.value - cf) <= fd.est_error
    assert worst["contour-closed"] <= 1e-9, worst
    assert max(worst.values()) <= 1e-6, worst
    assert fd_ok


def test_criterion_03_word_sum_identities():
    worst = 0.0
    for i in range(100):
        rng = make_rng(trial_seed(303, i))
        n = 1 + i % 5
        deg = int(rng.integers(0, 7))
        coeffs = rng.normal(size=deg + 1)
        cfg = SampleConfig(n)
        A = rand_hermitian_in(cfg, MINUS_ONE_ONE, rng)
        B = rand_hermitian(cfg, rng)
        f = FunctionSpec(MINUS_ONE_ONE, KTone(7, tuple(float(c) for c in coeffs), ()))
        re, im = re_im_parts(analytic_calc(f, A + 1j * B, "contour").value)
        even = np.zeros((n, n), dtype=complex)
        odd = np.zeros((n, n), dtype=complex)
        for l, c in enumerate(coeffs):
            for m in range(l // 2 + 1):
                even += c * (-1) ** m * poly_word_sum(l, 2 * m, A, B)
            for m in range(1, (l + 1) // 2 + 1):
                odd += c * (-1) ** (m - 1) * poly_word_sum(l, 2 * m - 1, A, B)
        worst = max(worst, rel_diff(re, even), rel_diff(im, odd))
    assert worst <= 1e-10, worst


def test_criterion_04_branch_soundness():
    bad = []
    for k in range(1, 9):
        for n in DIMS:
            f = random_certified("ktone", seed=1000 * k + n, k=k)
            rep = run_campaign("branch", f, 200, SampleConfig(n, seed=400 + k), options={"tone": k})
            vals = [m for m in rep.margins if m is not None]
            if rep.failures or len(vals) != 200 or min(vals) < -TAU or rep.cross_checks["mismatches"]:
                bad.append((k, n, rep.verdict, rep.worst, rep.failures[:1]))
    assert not bad, bad


def test_criterion_05_equivalence_and_expansion_order():
    bad = []
    for k in range(1, 9):
        for n in DIMS:
            f = random_certified("ktone", seed=1000 * k + n, k=k)
            for check in ("derivative_sign", "taylor_remainder"):
                rep = run_campaign(check, f, 40, SampleConfig(n, seed=500 + k), options={"tone": k})
                if rep.verdict != "pass" or rep.failures:
                    bad.append((check, k, n, rep.verdict, rep.worst))
    assert not bad, bad
    slopes = []
    for i in range(12):
        rng = make_rng(trial_seed(505, i))
        l = 1 + i % 2
        n = DIMS[i % len(DIMS)]
        f = random_certified("ktone", k=1 + i % 4, rng=rng) if i % 3 else random_certified("monotone", rng=rng)
        cfg = SampleConfig(n, margin=0.2, scale=0.25 if l == 1 else 1.0)
        A = rand_hermitian_in(cfg, f.domain, rng)
        B = rand_psd(cfg, rng)
        rep = expansion_order_probe(f, A, B, l)
        assert rep.ok, rep.to_json()
        slopes += [(l, fit.slope) for fit in (rep.re, rep.im) if fit.slope is not None]
    # every order must have produced real fits, not only noise-floor skips
    assert {l for l, _ in slopes} == {1, 2}, slopes


def test_criterion_06_refutation_power():
    controls = [("exp on (-1,1)", 1), ("pow 1.5 on (0,inf)", 1), ("pow 3.5 on (0,inf)", 2)]
    for text, k in controls:
        f = parse_spec(text)
        cfg = SampleConfig(2, seed=606)
        rep = run_campaign("derivative_sign", f, 500, cfg, options={"tone": k})
        assert rep.verdict == "refuted", (text, rep.worst)
        w = rep.worst
        assert w["margin"] < -10 * TAU
        again = replay_trial("derivative_sign", f, cfg, w["seed"], options={"tone": k})
        assert again == w["margin"], (text, again, w)
        assert w["seed"] == trial_seed(cfg.seed, w["trial"])


def test_criterion_07_monotone_convex_suite():
    mono = random_certified("monotone", seed=707)
    rep = run_campaign("pick", mono, 200, SampleConfig(3, seed=71))
    assert rep.verdict == "pass" and rep.strict_violations == 0, rep.worst
    assert min(rep.margins) > 0

    dec = random_certified("decreasing", seed=708)
    dec_beta = FunctionSpec(POSITIVE, Decreasing(dec.form.alpha, 0.7, dec.form.atoms))
    for part, f in ((1, mono), (1, parse_spec("pow 0.5 on (0,inf)")), (2, dec), (2, dec_beta), (3, dec)):
        for n in (2, 4):
            rep = run_campaign(f"thm43_{part}", f, 50, SampleConfig(n, seed=72 + part))
            assert rep.verdict == "pass" and not rep.failures, (part, f.text(), rep.worst)

    cases = [
        ("pow 0.5 on (0,inf)", "monotone"),
        (log1p_monotone_rep(), "monotone"),
        (mono, "monotone"),
        ("inv on (0,inf)", "convex"),
        (dec, "convex"),
    ]
    for spec, flavor in cases:
        f = parse_spec(spec) if isinstance(spec, str) else spec
        for k in (1, 2):
            for n in (2, 4):
                rep = run_campaign("sandwich", f, 25, SampleConfig(n, seed=77 + k), options={"k": k, "flavor": flavor})
                assert rep.verdict == "pass" and not rep.failures, (f.text(), k, n, rep.worst)


def test_criterion_08_sector_preservation():
    mono = random_certified("monotone", seed=808)
    dec = random_certified("decreasing", seed=809)
    for p in (0.25, 0.5, 0.75, 1.0):
        for cone in (1, -1):
            for f, direction in ((mono, "monotone"), (dec, "decreasing")):
                opts = {"p": p, "cone": cone, "direction": direction}
                rep = run_campaign("sector", f, 100, SampleConfig(3, seed=88), options=opts)
                assert rep.verdict == "pass", (p, cone, direction, rep.worst)
                assert rep.strict_violations == 0 and min(rep.margins) > 0
    # n = 1: matrix margins against scalar argument arithmetic
    worst = 0.0
    for i in range(200):
        rng = make_rng(trial_seed(888, i))
        p = (0.25, 0.5, 0.75, 1.0)[i % 4]
        f, direction = ((mono, "monotone"), (dec, "decreasing"), (parse_spec("pow 0.5 on (0,inf)"), "monotone"))[i % 3]
        X = rand_sector(SampleConfig(1), p, rng)
        if i % 2:
            X = X.conj()
        res = check_sector_map(f, X, p, direction)
        w = complex(f.evaluate(complex(X[0, 0])))
        if res.target_cone == -1:
            w = w.conjugate()
        arg, r = np.angle(w), abs(w)
        scalar = (r * np.sin(arg), r * np.sin(p * np.pi - arg))
        member = 0 < arg < p * np.pi
        assert member == (min(res.margins) > 0)
        worst = max(worst, max(abs(a - b) for a, b in zip(res.margins, scalar)) / (1 + r))
    assert worst <= 1e-10, worst


def test_criterion_09_counterexample_thresholds():
    for p in (1.9, 2.0):
        assert not counterexample_search("remark35_im", p).found
    for p in (2.1, 2.5):
        assert counterexample_search("remark35_im", p).found
    for p in (0.5, 3.2):
        assert counterexample_search("remark35_re", p).found
    for p in (1.0, 2.0, 3.0):
        assert not counterexample_search("remark35_re", p).found
    res = counterexample_search("remark48")
    assert res.found
    A = [[Fraction(x) for x in row] for row in res.witness["A"]]
    B = [[Fraction(x) for x in row] for row in res.witness["B"]]
    S = [[sum(A[i][k] * B[k][j] + B[i][k] * A[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    assert A[0][0] > 0 and A[0][0] * A[1][1] - A[0][1] * A[1][0] > 0
    assert B[0][0] > 0 and B[0][0] * B[1][1] - B[0][1] * B[1][0] > 0
    assert S[0][0] * S[1][1] - S[0][1] * S[1][0] < 0


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "opertone.cli", *args], capture_output=True, text=True)


def test_criterion_10_reproducible_reports(tmp_path):
    spec = "ktone 3 poly [0.1, -0.2, 0.3] atoms [(0.5, 0.3), (0.2, -0.7)]"
    outs = []
    for run, jobs in enumerate(("1", "1", "4")):
        path = tmp_path / f"r{run}.json"
        proc = _cli(
            "verify", "--check", "branch", "--spec", spec, "--dims", "2,3", "--trials", "40",
            "--seed", "1234", "--jobs", jobs, "--no-timestamp", "--output", str(path),
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    reports = json.loads(outs[0])
    assert [r["n"] for r in reports] == [2, 3] and all("timestamp" not in r for r in reports)
