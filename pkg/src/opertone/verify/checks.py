"""Executable forms of the operator inequalities.

Every check returns :class:`Margin` objects. ``Margin.value`` is the smallest
eigenvalue of a Hermitian difference arranged so that the inequality holds
exactly when ``value >= 0``; ``Margin.scale`` is the size of the compared
quantities. A trial passes at tolerance ``tau`` when
``value >= -tau (1 + scale)``, i.e. when ``normalized >= -tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, PreconditionError
from ..frechet import frechet, frechet_series, taylor_sums
from ..funcalc.calc import analytic_calc, calc_hermitian
from ..matcore import (
    DEFAULT_TAU,
    EPS,
    as_hermitian,
    as_matrix,
    fro,
    hermitian_eigen,
    hermitian_part,
    psd_margin,
    re_im_parts,
)
from ..repfun.parse import parse_spec
from ..repfun.spec import FunctionSpec
from .tones import SectorParams, ToneBranch

PROBE_EPS = tuple(2.0**-j for j in range(3, 11))
SLOPE_WINDOW = 0.3
PROBE_MIN_POINTS = 3
# residuals below this multiple of eps * (size of the terms) are roundoff
PROBE_NOISE = 1e3
PSD_GATE = 1e-12

_LOG = parse_spec("log on (0, inf)")


@dataclass(frozen=True)
class Margin:
    value: float
    scale: float
    diff: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def normalized(self) -> float:
        return self.value / (1.0 + self.scale)

    def passes(self, tau: float = DEFAULT_TAU) -> bool:
        return self.normalized >= -tau


def _margin(diff, *parts) -> Margin:
    diff = hermitian_part(np.asarray(diff, dtype=complex))
    scale = max([fro(p) for p in parts] + [fro(diff)])
    return Margin(psd_margin(diff), scale, diff)


def _require_psd(B, what="B"):
    lo = psd_margin(B)
    if lo < -PSD_GATE * (1.0 + fro(B)):
        raise PreconditionError(f"{what} must be positive semidefinite (min eigenvalue {lo:.3e})", lo)


def _require_in_domain(f: FunctionSpec, H, what="A"):
    lam = hermitian_eigen(H).values
    bad = ~f.domain.contains(lam)
    if np.any(bad):
        v = float(lam[np.argmax(bad)])
        raise DomainError(f"eigenvalue {v!r} of {what} is outside {f.domain.text()}", v)


# ------------------------------------------------------------------ k-tone conditions


def check_derivative_sign(f: FunctionSpec, k: int, A, B, engine: str = "auto") -> Margin:
    """``D^k f(A; B) >= 0`` for ``B >= 0``."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    _require_in_domain(f, A)
    _require_psd(B)
    D = frechet(f, A, B, k, engine).value
    return _margin(D)


def check_taylor_remainder(f: FunctionSpec, k: int, A, B, engine: str = "auto") -> Margin:
    """``f(A + B) >= sum_{m<k} D^m f(A; B) / m!`` for ``B >= 0``."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    _require_in_domain(f, A)
    _require_in_domain(f, A + B, "A + B")
    _require_psd(B)
    top = calc_hermitian(f, A + B)
    if k == 0:
        return _margin(top, top)
    ders = frechet_series(f, A, B, k - 1, engine)
    taylor = sum(d.value / math.factorial(m) for m, d in enumerate(ders))
    return _margin(top - taylor, top, taylor)


def branch_sides(f: FunctionSpec, tone: ToneBranch, A, B, engine="auto", path="auto"):
    """``(LHS, RHS)``: the branch's part of ``f(A+iB)`` and its partial sum."""
    X = A + 1j * B
    re, im = re_im_parts(analytic_calc(f, X, path).value)
    lhs = re if tone.part == "re" else im
    sums = taylor_sums(f, A, B, tone.truncation, engine, max_order=tone.max_order)
    return lhs, tone.partial_sum(sums)


def check_branch(f: FunctionSpec, tone: ToneBranch, A, B, engine="auto", path="auto", general_b=False) -> Margin:
    """Signed margin of the branch inequality for ``k = tone.k``.

    ``B`` must be PSD unless ``general_b`` is set, which the Re branches
    (B1, B2) allow for any Hermitian ``B``.
    """
    A = as_hermitian(A)
    B = as_hermitian(B)
    _require_in_domain(f, A)
    if tone.needs_psd_b or not general_b:
        _require_psd(B)
    lhs, rhs = branch_sides(f, tone, A, B, engine, path)
    diff = rhs - lhs if tone.sense == "le" else lhs - rhs
    return _margin(diff, lhs, rhs)


def sign_flip_identity(m: Margin) -> float:
    """Discrepancy in ``psd_margin(-D) = -lambda_max(D)`` for the trial's
    difference matrix: the opposite-sign branch sees exactly ``-D``."""
    if m.diff is None:
        return 0.0
    flipped = psd_margin(-m.diff)
    top = float(np.linalg.eigvalsh(m.diff)[-1])
    return abs(flipped + top) / (1.0 + abs(top))


# ------------------------------------------------------------------ expansion order


@dataclass
class ProbeFit:
    part: str
    expected: float
    residuals: list
    used: list
    slope: float | None
    ok: bool
    skipped: str = ""

    def to_json(self) -> dict:
        return {
            "part": self.part,
            "expected_slope": self.expected,
            "residuals": [float(r) for r in self.residuals],
            "points_used": self.used,
            "slope": None if self.slope is None else float(self.slope),
            "ok": self.ok,
            "skipped": self.skipped,
        }


@dataclass
class ProbeReport:
    l: int
    eps: tuple
    re: ProbeFit
    im: ProbeFit

    @property
    def ok(self) -> bool:
        return self.re.ok and self.im.ok

    def to_json(self) -> dict:
        return {"l": self.l, "eps": list(self.eps), "re": self.re.to_json(), "im": self.im.to_json(), "ok": self.ok}


def _fit(part, expected, eps, res, floor) -> ProbeFit:
    used = [i for i, r in enumerate(res) if r > floor]
    if not used:
        return ProbeFit(part, expected, res, used, None, True, "residual at roundoff for every epsilon")
    if len(used) < PROBE_MIN_POINTS:
        return ProbeFit(part, expected, res, used, None, False, "too few points above the noise floor")
    x = np.log([eps[i] for i in used])
    y = np.log([res[i] for i in used])
    slope = float(np.polyfit(x, y, 1)[0])
    return ProbeFit(part, expected, res, used, slope, abs(slope - expected) <= SLOPE_WINDOW)


def expansion_order_probe(f: FunctionSpec, A, B, l: int, engine: str = "auto", eps=PROBE_EPS) -> ProbeReport:
    """Log-log order of the truncated expansions of ``Re``/``Im f(A + i eps B)``.

    With ``l`` terms the Re residual should scale like ``eps^(2l+2)`` and the
    Im residual like ``eps^(2l+1)``. Points whose residual sits below the
    roundoff floor are dropped from the regression; when all of them are
    (polynomials of low degree) the fit is skipped and reported as such.
    """
    if l < 1:
        raise ValueError(f"l must be >= 1, got {l}")
    A = as_hermitian(A)
    B = as_hermitian(B)
    _require_in_domain(f, A)
    ders = [d.value for d in frechet_series(f, A, B, 2 * l, engine)]
    size = sum(fro(d) / math.factorial(m) for m, d in enumerate(ders))
    floor = PROBE_NOISE * EPS * (1.0 + size)
    res_re, res_im = [], []
    for e in eps:
        re, im = re_im_parts(analytic_calc(f, A + 1j * e * B).value)
        even = sum((-1) ** m * e ** (2 * m) / math.factorial(2 * m) * ders[2 * m] for m in range(l + 1))
        odd = sum((-1) ** (m - 1) * e ** (2 * m - 1) / math.factorial(2 * m - 1) * ders[2 * m - 1] for m in range(1, l + 1))
        res_re.append(fro(re - even))
        res_im.append(fro(im - odd))
    eps = tuple(eps)
    return ProbeReport(
        l,
        eps,
        _fit("re", 2 * l + 2, eps, res_re, floor),
        _fit("im", 2 * l + 1, eps, res_im, floor),
    )


# ------------------------------------------------------------------ monotone / convex characterizations


def check_pick(f: FunctionSpec, X, path: str = "auto") -> Margin:
    """``Im f(X) >= 0`` whenever ``Im X > 0``."""
    X = as_matrix(X)
    _, im_x = re_im_parts(X)
    lo = psd_margin(im_x)
    if lo <= 0:
        raise PreconditionError(f"Im X must be positive definite (min eigenvalue {lo:.3e})", lo)
    F = analytic_calc(f, X, path).value
    _, im = re_im_parts(F)
    return _margin(im, F)


def _log_hermitian(H):
    spec = hermitian_eigen(H)
    if spec.values[0] <= 0:
        raise DomainError(f"log needs a positive definite matrix (min eigenvalue {spec.values[0]:.3e})", spec.values[0])
    U = spec.right_vectors
    return hermitian_part((U * np.log(spec.values)) @ U.conj().T)


def check_thm43(f: FunctionSpec, X, part: int, path: str = "auto", tau: float = DEFAULT_TAU) -> dict:
    """Margins of the ordered chains comparing ``f(Re X)`` and ``Re f(X)``.

    part 1 (nonnegative monotone f, ``Re X > 0``):
        ``lower``: ``f(Re X) >= 0``; ``upper``: ``Re f(X) >= f(Re X)``.
    part 2 (``beta x`` plus a nonnegative monotone decreasing f, ``Re X > 0``):
        ``lower``: ``Re f(X) >= 0``; ``upper``: ``f(Re X) >= Re f(X)``.
    part 3 (nonnegative monotone decreasing f):
        ``pick``: ``Im f(X) >= 0`` when ``Im X < 0``; and when ``Re X > 0``
        ``lower``, ``upper`` as in part 2 plus ``log``:
        ``log f(Re X) >= Re log f(X)``. The principal log of ``f(X)`` is
        taken by the calculus on the right half-plane, which contains the
        spectrum once ``Re f(X) > 0``. If ``Re f(X)`` is not above ``tau``
        the log margin is ``None`` (skipped, not failed).

    Keys whose hypothesis on ``X`` does not hold are omitted; at least one
    must hold.
    """
    X = as_matrix(X)
    re_x, im_x = re_im_parts(X)
    out = {}
    re_pos = psd_margin(re_x) > 0
    im_neg = psd_margin(-im_x) > 0
    if part not in (1, 2, 3):
        raise ValueError(f"part must be 1, 2 or 3, got {part}")
    if part in (1, 2) and not re_pos:
        raise PreconditionError("Re X must be positive definite", psd_margin(re_x))
    if part == 3 and not (re_pos or im_neg):
        raise PreconditionError("need Re X > 0 or Im X < 0", max(psd_margin(re_x), psd_margin(-im_x)))
    F = analytic_calc(f, X, path).value
    re_f, im_f = re_im_parts(F)
    if part == 3 and im_neg:
        out["pick"] = _margin(im_f, F)
    if not re_pos:
        return out
    f_re = calc_hermitian(f, re_x)
    if part == 1:
        out["lower"] = _margin(f_re)
        out["upper"] = _margin(re_f - f_re, re_f, f_re)
        return out
    out["lower"] = _margin(re_f)
    out["upper"] = _margin(f_re - re_f, re_f, f_re)
    if part == 3:
        lower = out["lower"]
        if lower.value > tau * (1.0 + lower.scale):
            log_fx = analytic_calc(_LOG, F, path).value
            re_log, _ = re_im_parts(log_fx)
            log_fre = _log_hermitian(f_re)
            out["log"] = _margin(log_fre - re_log, re_log, log_fre)
        else:
            out["log"] = None
    return out


# ------------------------------------------------------------------ sector cones


def sector_membership(X, p: float, cone: int = 1) -> tuple[bool, tuple[float, float]]:
    """Membership of ``X`` in ``V_{p pi}`` (``cone=+1``) or ``V_{-p pi}`` (``cone=-1``).

    For ``V_{p pi}`` the margins are ``(min eig Im X, min eig -Im(e^{-ip pi} X))``;
    ``V_{-p pi}`` is tested through ``X*``.
    """
    SectorParams(p)
    X = as_matrix(X)
    if cone not in (1, -1):
        raise ValueError(f"cone must be +1 or -1, got {cone}")
    Y = X if cone == 1 else X.conj().T
    _, im = re_im_parts(Y)
    _, im2 = re_im_parts(np.exp(-1j * p * np.pi) * Y)
    margins = (psd_margin(im), psd_margin(-im2))
    return margins[0] > 0 and margins[1] > 0, margins


@dataclass
class SectorResult:
    source_cone: int
    target_cone: int
    margins: tuple
    scale: float
    escape: bool
    constant_f: bool

    @property
    def margin(self) -> Margin:
        value = 0.0 if self.escape else min(self.margins)
        return Margin(value, self.scale)

    def verdict(self, tau: float = DEFAULT_TAU) -> str:
        if self.escape:
            return "pass"
        m = self.margin
        if self.constant_f:
            return "pass" if m.passes(tau) else "refuted"
        if m.value > 0:
            return "pass"
        return "refuted" if m.normalized < -10 * tau else "inconclusive"


def check_sector_map(f: FunctionSpec, X, p: float, direction: str = "monotone", path="auto", tau=DEFAULT_TAU) -> SectorResult:
    """Does ``f`` map the sector cone containing ``X`` into the predicted cone?

    ``monotone`` keeps the cone, ``decreasing`` swaps ``V_{p pi}`` and
    ``V_{-p pi}``. A value ``f(X) = alpha I`` with ``alpha >= 0`` is accepted
    as the constant escape.
    """
    if direction not in ("monotone", "decreasing"):
        raise ValueError(f"direction must be monotone or decreasing, got {direction!r}")
    X = as_matrix(X)
    cone = 0
    for c in (1, -1):
        if sector_membership(X, p, c)[0]:
            cone = c
            break
    if cone == 0:
        raise PreconditionError(f"X is in neither V_(p pi) nor V_(-p pi) for p={p}")
    target = cone if direction == "monotone" else -cone
    F = analytic_calc(f, X, path).value
    _, margins = sector_membership(F, p, target)
    n = F.shape[0]
    alpha = np.trace(F) / n
    scale = fro(F)
    escape = bool(
        fro(F - alpha * np.eye(n)) <= tau * (1.0 + scale) and abs(alpha.imag) <= tau * (1.0 + scale) and alpha.real >= -tau
    )
    return SectorResult(cone, target, margins, scale, escape, f.tags.constant)


# ------------------------------------------------------------------ sandwich chains

_CHAINS = {
    # flavor: (re lower, re upper, im lower, im upper) as partial sum indices in k
    "monotone": (lambda k: 2 * k - 2, lambda k: 2 * k - 1, lambda k: 2 * k - 2, lambda k: 2 * k - 1),
    "convex": (lambda k: 2 * k - 1, lambda k: 2 * k - 2, lambda k: 2 * k - 1, lambda k: 2 * k),
}


def sandwich_indices(k: int, flavor: str) -> dict:
    rl, ru, il, iu = _CHAINS[flavor]
    return {"re_lower": rl(k), "re_upper": ru(k), "im_lower": il(k), "im_upper": iu(k)}


def check_sandwich(f: FunctionSpec, k: int, A, B, flavor: str = "monotone", engine="auto", path="auto") -> dict:
    """Two-sided chains ``even[i] <= Re f(A+iB) <= even[j]`` and the odd analogue.

    ``monotone``: ``even[2k-2] <= Re <= even[2k-1]``, ``odd[2k-2] <= Im <= odd[2k-1]``.
    ``convex``: ``even[2k-1] <= Re <= even[2k-2]``, ``odd[2k-1] <= Im <= odd[2k]``.
    The Re chain holds for Hermitian ``B``; the Im chain needs ``B >= 0``
    and is reported as ``None`` otherwise.
    """
    if flavor not in _CHAINS:
        raise ValueError(f"flavor must be monotone or convex, got {flavor!r}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    A = as_hermitian(A)
    B = as_hermitian(B)
    _require_in_domain(f, A)
    idx = sandwich_indices(k, flavor)
    K = max(idx.values())
    top = max(2 * max(idx["re_lower"], idx["re_upper"]), 2 * max(idx["im_lower"], idx["im_upper"]) - 1)
    sums = taylor_sums(f, A, B, K, engine, max_order=top)
    re, im = re_im_parts(analytic_calc(f, A + 1j * B, path).value)
    out = {
        "re_lower": _margin(re - sums.even[idx["re_lower"]], re, sums.even[idx["re_lower"]]),
        "re_upper": _margin(sums.even[idx["re_upper"]] - re, re, sums.even[idx["re_upper"]]),
    }
    psd_b = psd_margin(B) >= -PSD_GATE * (1.0 + fro(B))
    if psd_b:
        out["im_lower"] = _margin(im - sums.odd[idx["im_lower"]], im, sums.odd[idx["im_lower"]])
        out["im_upper"] = _margin(sums.odd[idx["im_upper"]] - im, im, sums.odd[idx["im_upper"]])
    else:
        out["im_lower"] = out["im_upper"] = None
    return out
