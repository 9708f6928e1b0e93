"""Seeded verification campaigns and their reports.

A campaign runs one registered check on ``trials`` random instances of size
``n``. Trial ``t`` draws everything from ``PCG64(trial_seed(seed, t))`` so a
single trial can be replayed from the ``(seed, trial)`` pair in the report,
whatever the scheduling. Margins are stored normalized,
``min eig / (1 + scale)``, so one threshold ``tau`` applies to every trial:

* pass: every margin ``>= -tau``
* refuted: some margin ``< -10 tau`` (its trial is the witness)
* inconclusive: otherwise, or when there are no margins at all

Every 20th trial is recomputed with the alternate derivative engine and the
alternate calculus path, and its difference matrix is run through the
sign-flip identity.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import CampaignError, OpertoneError, ValidationError
from ..frechet import resolve_engine
from ..matcore import DEFAULT_TAU, hermitian_eigen
from ..repfun.closed_form import has_closed_form
from ..repfun.parse import format_spec
from ..repfun.spec import POSITIVE, FunctionSpec
from ..sampler import SampleConfig, make_rng, rand_hermitian, rand_hermitian_in, rand_pd, rand_psd, rand_sector, trial_seed
from .checks import (
    Margin,
    check_branch,
    check_derivative_sign,
    check_pick,
    check_sandwich,
    check_sector_map,
    check_taylor_remainder,
    check_thm43,
    sign_flip_identity,
)
from .tones import SectorParams, ToneBranch

CROSS_CHECK_EVERY = 20
CROSS_CHECK_TOL = 1e-6
MAX_FAILURE_RATE = 0.01
IDENTITY_TOL = 1e-12


@dataclass
class TrialContext:
    engine: str = "auto"
    path: str = "auto"
    options: dict = field(default_factory=dict)
    tau: float = DEFAULT_TAU
    cfg: SampleConfig = field(default_factory=lambda: SampleConfig(2))


@dataclass(frozen=True)
class CheckDef:
    name: str
    runner: Callable
    needs: tuple = ()
    strict: bool = False
    uses_engine: bool = True
    summary: str = ""


CHECKS: dict[str, CheckDef] = {}


def register_check(name, runner, needs=(), strict=False, uses_engine=True, summary=""):
    CHECKS[name] = CheckDef(name, runner, tuple(needs), strict, uses_engine, summary)
    return runner


# ------------------------------------------------------------------ instance generators


def _sample_a(f: FunctionSpec, cfg: SampleConfig, rng):
    return rand_hermitian_in(cfg, f.domain, rng)


def _sample_b(cfg, rng, general=False):
    return rand_hermitian(cfg, rng) if general else rand_psd(cfg, rng)


def _run_derivative_sign(f, ctx, rng):
    k = ctx.options["tone"]
    A = _sample_a(f, ctx.cfg, rng)
    B = _sample_b(ctx.cfg, rng)
    return {"derivative": check_derivative_sign(f, k, A, B, ctx.engine)}


def _run_taylor_remainder(f, ctx, rng):
    k = ctx.options["tone"]
    cfg = ctx.cfg
    A = _sample_a(f, cfg, rng)
    B = _sample_b(cfg, rng)
    if math.isfinite(f.domain.b):
        # keep sigma(A + B) inside the domain
        room = f.domain.b - cfg.margin - float(hermitian_eigen(A).values[-1])
        B = B * min(1.0, 0.9 * room / cfg.scale)
    return {"remainder": check_taylor_remainder(f, k, A, B, ctx.engine)}


def _run_branch(f, ctx, rng):
    tone = ToneBranch(int(ctx.options["tone"]))
    general = bool(ctx.options.get("general_b", False)) and not tone.needs_psd_b
    A = _sample_a(f, ctx.cfg, rng)
    B = _sample_b(ctx.cfg, rng, general)
    return {tone.branch: check_branch(f, tone, A, B, ctx.engine, ctx.path, general_b=general)}


def _run_pick(f, ctx, rng):
    X = rand_hermitian(ctx.cfg, rng) + 1j * rand_pd(ctx.cfg, rng)
    return {"im": check_pick(f, X, ctx.path)}


def _thm43_runner(part):
    def run(f, ctx, rng):
        A = rand_hermitian_in(ctx.cfg, POSITIVE, rng)
        if part == 3:
            X = A - 1j * rand_pd(ctx.cfg, rng)
        else:
            X = A + 1j * rand_hermitian(ctx.cfg, rng)
        return check_thm43(f, X, part, ctx.path, ctx.tau)

    return run


def _run_sector(f, ctx, rng):
    p = float(ctx.options.get("p", 0.5))
    cone = int(ctx.options.get("cone", 1))
    direction = ctx.options.get("direction", "decreasing" if f.tags.decreasing and not f.tags.monotone else "monotone")
    X = rand_sector(ctx.cfg, p, rng)
    if cone == -1:
        X = X.conj().T
    res = check_sector_map(f, X, p, direction, ctx.path, ctx.tau)
    return {"sector": res.margin}


def _run_sandwich(f, ctx, rng):
    k = int(ctx.options.get("k", 1))
    flavor = ctx.options.get("flavor", "monotone")
    A = _sample_a(f, ctx.cfg, rng)
    B = _sample_b(ctx.cfg, rng, bool(ctx.options.get("general_b", False)))
    return check_sandwich(f, k, A, B, flavor, ctx.engine, ctx.path)


register_check("derivative_sign", _run_derivative_sign, needs=("tone",), summary="D^k f(A;B) >= 0")
register_check("taylor_remainder", _run_taylor_remainder, needs=("tone",), summary="f(A+B) >= Taylor polynomial of order k-1")
register_check("branch", _run_branch, needs=("tone",), summary="k mod 4 branch inequality for f(A+iB)")
register_check("pick", _run_pick, strict=True, uses_engine=False, summary="Im f(X) >= 0 for Im X > 0")
for _part in (1, 2, 3):
    register_check(f"thm43_{_part}", _thm43_runner(_part), uses_engine=False, summary=f"Re/Im chains, part {_part}")
register_check("sector", _run_sector, strict=True, uses_engine=False, summary="sector cone preservation")
register_check("sandwich", _run_sandwich, summary="two-sided Taylor chains")


# ------------------------------------------------------------------ report


@dataclass
class CheckReport:
    check: str
    spec: str
    n: int
    trials: int
    tau: float
    margins: list
    verdict: str
    worst: dict | None
    engine: str
    path: str
    seed: int
    options: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    skipped: int = 0
    strict_violations: int = 0
    cross_checks: dict = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        out = {
            "check": self.check,
            "spec": self.spec,
            "trials": self.trials,
            "tau": self.tau,
            "margins": self.margins,
            "worst": self.worst,
            "verdict": self.verdict,
            "n": self.n,
            "seed": self.seed,
            "engine": self.engine,
            "path": self.path,
            "options": dict(sorted(self.options.items())),
            "failures": self.failures,
            "skipped": self.skipped,
            "strict_violations": self.strict_violations,
            "cross_checks": self.cross_checks,
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out


def verdict_for(margins, tau: float) -> str:
    vals = [m for m in margins if m is not None]
    if not vals:
        return "inconclusive"
    lo = min(vals)
    if lo >= -tau:
        return "pass"
    if lo < -10.0 * tau:
        return "refuted"
    return "inconclusive"


@dataclass
class _Trial:
    index: int
    seed: int
    margin: float | None = None
    raw: float | None = None
    error: str | None = None
    skipped: bool = False
    cross: str | None = None  # None, "ok", "mismatch", "error"
    identity_ok: bool = True


def _alternate(f, engine, path):
    name = resolve_engine(f, engine)
    if name == "divided_diff":
        alt_engine = "closed_form" if has_closed_form(f) else "contour"
    else:
        alt_engine = "divided_diff"
    alt_path = "contour" if path in ("auto", "eigen") else "eigen"
    return alt_engine, alt_path


def _reduce(margins: dict) -> tuple[float | None, float | None, Margin | None]:
    """Smallest normalized margin among the trial's entries, with its raw value."""
    best = None
    for m in margins.values():
        if m is None:
            continue
        if best is None or m.normalized < best.normalized:
            best = m
    if best is None:
        return None, None, None
    return best.normalized, best.value, best


def _run_one(check: CheckDef, f, ctx: TrialContext, seed: int, t: int) -> _Trial:
    s = trial_seed(seed, t)
    tr = _Trial(t, s)
    try:
        margins = check.runner(f, ctx, make_rng(s))
    except (OpertoneError, np.linalg.LinAlgError, FloatingPointError) as exc:
        tr.error = f"{type(exc).__name__}: {exc}"
        return tr
    tr.margin, tr.raw, worst = _reduce(margins)
    if tr.margin is None:
        tr.skipped = True
        return tr
    if t % CROSS_CHECK_EVERY == 0:
        tr.identity_ok = all(sign_flip_identity(m) <= IDENTITY_TOL for m in margins.values() if m is not None)
        alt_engine, alt_path = _alternate(f, ctx.engine, ctx.path)
        alt = TrialContext(alt_engine if check.uses_engine else ctx.engine, alt_path, ctx.options, ctx.tau, ctx.cfg)
        try:
            other, _, _ = _reduce(check.runner(f, alt, make_rng(s)))
            tr.cross = "ok" if other is not None and abs(other - tr.margin) <= CROSS_CHECK_TOL else "mismatch"
        except (OpertoneError, np.linalg.LinAlgError, FloatingPointError):
            tr.cross = "error"
    return tr


def _validate_options(check: CheckDef, options: dict):
    for key in check.needs:
        if key not in options:
            raise ValidationError(f"check '{check.name}' needs option '{key}'")
    if "tone" in options:
        ToneBranch(int(options["tone"]))
    if "p" in options:
        SectorParams(float(options["p"]))
    if options.get("cone", 1) not in (1, -1):
        raise ValidationError(f"cone must be +1 or -1, got {options['cone']}")
    if options.get("flavor", "monotone") not in ("monotone", "convex"):
        raise ValidationError(f"flavor must be monotone or convex, got {options['flavor']}")
    if options.get("direction", "monotone") not in ("monotone", "decreasing"):
        raise ValidationError(f"direction must be monotone or decreasing, got {options['direction']}")


def run_campaign(
    check: str,
    f: FunctionSpec,
    trials: int,
    cfg: SampleConfig,
    engine: str = "auto",
    path: str = "auto",
    options: dict | None = None,
    tau: float = DEFAULT_TAU,
    jobs: int = 1,
    timestamp: bool = False,
) -> CheckReport:
    """Run ``trials`` seeded trials of a registered check and aggregate them."""
    if check not in CHECKS:
        raise ValidationError(f"unknown check {check!r}; registered: {', '.join(sorted(CHECKS))}")
    if trials < 0:
        raise ValidationError(f"trials must be >= 0, got {trials}")
    cdef = CHECKS[check]
    options = dict(options or {})
    _validate_options(cdef, options)
    resolve_engine(f, engine)
    ctx = TrialContext(engine, path, options, tau, cfg)
    if jobs > 1 and trials > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda t: _run_one(cdef, f, ctx, cfg.seed, t), range(trials)))
    else:
        results = [_run_one(cdef, f, ctx, cfg.seed, t) for t in range(trials)]

    failures = [{"trial": r.index, "seed": r.seed, "error": r.error} for r in results if r.error]
    if trials and len(failures) > MAX_FAILURE_RATE * trials:
        raise CampaignError(
            f"{len(failures)} of {trials} trials failed for check '{check}' "
            f"(first: trial {failures[0]['trial']}: {failures[0]['error']})"
        )
    margins = [r.margin for r in results]
    verdict = verdict_for(margins, tau)
    worst = None
    valid = [r for r in results if r.margin is not None]
    if valid:
        w = min(valid, key=lambda r: (r.margin, r.index))
        worst = {"trial": w.index, "seed": w.seed, "margin": w.margin}
    strict = cdef.strict and not f.tags.constant
    strict_violations = sum(1 for r in valid if strict and r.raw <= 0.0)
    crossed = [r for r in results if r.cross is not None]
    cross = {
        "count": len(crossed),
        "mismatches": sum(r.cross == "mismatch" for r in crossed),
        "errors": sum(r.cross == "error" for r in crossed),
        "identity_failures": sum(not r.identity_ok for r in crossed),
    }
    if verdict == "pass" and (strict_violations or cross["mismatches"] or cross["identity_failures"]):
        verdict = "inconclusive"
    return CheckReport(
        check=check,
        spec=format_spec(f),
        n=cfg.n,
        trials=trials,
        tau=tau,
        margins=margins,
        verdict=verdict,
        worst=worst,
        engine=engine,
        path=path,
        seed=cfg.seed,
        options=options,
        failures=failures,
        skipped=sum(r.skipped for r in results),
        strict_violations=strict_violations,
        cross_checks=cross,
        timestamp=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()) if timestamp else None,
    )


def replay_trial(check: str, f: FunctionSpec, cfg: SampleConfig, trial_seed_value: int, engine="auto", path="auto", options=None, tau=DEFAULT_TAU) -> float | None:
    """Recompute one trial's normalized margin from its recorded seed."""
    cdef = CHECKS[check]
    ctx = TrialContext(engine, path, dict(options or {}), tau, cfg)
    margin, _, _ = _reduce(cdef.runner(f, ctx, make_rng(trial_seed_value)))
    return margin
