"""Analytic functional calculus ``f(X)`` for ``X = A + iB``.

Two hypotheses make ``f(X)`` well defined for ``f`` analytic on
``(C \\ R) U (a, b)``: either ``sigma(Re X)`` lies in ``(a, b)`` (then the
spectrum of ``X`` avoids ``R \\ (a, b)``), or ``Im X`` is definite (then the
spectrum sits in an open half-plane). Both are checked here before any
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, PreconditionError
from ..matcore import (
    EPS,
    ILL_CONDITIONED,
    as_hermitian,
    as_matrix,
    fro,
    general_eigen,
    hermitian_eigen,
    hermitian_part,
    matrix_to_json,
    re_im_parts,
)
from ..repfun.spec import FunctionSpec
from .contour import ENDPOINT_CLEARANCE, Contour, integrate, strip_contour, upper_contour

CALC_TOL = 1e-11
CASES = ("strip", "upper_half", "lower_half")


@dataclass
class CalcResult:
    value: np.ndarray
    path: str
    est_error: float
    nodes_used: int = 0
    case: str = ""
    contour: Contour | None = None
    history: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "path": self.path,
            "case": self.case,
            "est_error": float(self.est_error),
            "nodes_used": int(self.nodes_used),
            "value": matrix_to_json(self.value),
        }
        if self.contour is not None:
            out["contour"] = self.contour.to_json(self.nodes_used)
        return out


def calc_hermitian(f: FunctionSpec, A) -> np.ndarray:
    """``f(A) = U diag(f(lam)) U*`` for Hermitian ``A`` with spectrum in the domain."""
    A = as_hermitian(A)
    spec = hermitian_eigen(A)
    lam = spec.values
    bad = ~f.domain.contains(lam, ENDPOINT_CLEARANCE)
    if np.any(bad):
        v = float(lam[np.argmax(bad)])
        raise DomainError(f"eigenvalue {v!r} is outside or within 1e-9 of the boundary of {f.domain.text()}", v)
    vals = f.evaluate(lam).real
    U = spec.right_vectors
    return hermitian_part((U * vals) @ U.conj().T)


def hypothesis_margins(f: FunctionSpec, X) -> dict:
    """Margins of the three admissible cases (positive means satisfied).

    ``strip``: distance of ``sigma(Re X)`` inside ``(a, b)``;
    ``upper_half`` / ``lower_half``: ``+/- `` extreme eigenvalue of ``Im X``.
    """
    A, B = re_im_parts(X)
    lam_a = hermitian_eigen(A).values
    lam_b = hermitian_eigen(B).values
    gaps = f.domain.gap(lam_a)
    return {
        "strip": float(np.min(gaps)),
        "upper_half": float(lam_b[0]),
        "lower_half": float(-lam_b[-1]),
    }


def select_case(f: FunctionSpec, X) -> str:
    margins = hypothesis_margins(f, X)
    for case in CASES:
        if margins[case] > 0:
            return case
    worst = max(margins.values())
    raise PreconditionError(
        "neither sigma(Re X) inside the domain nor Im X definite "
        f"(margins: strip {margins['strip']:.3e}, Im X min {margins['upper_half']:.3e})",
        worst,
    )


def build_contour(X, f: FunctionSpec, case: str) -> Contour:
    """Quadrature contour for ``X`` under the given case.

    ``upper_half`` needs ``Im X > 0``; ``strip`` needs ``sigma(Re X)`` in the
    domain. ``lower_half`` is handled by reflection and has no contour of
    its own.
    """
    X = as_matrix(X)
    margins = hypothesis_margins(f, X)
    if case not in ("strip", "upper_half"):
        raise ValueError(f"unknown contour case {case!r}")
    if margins[case] <= 0:
        raise PreconditionError(f"hypothesis '{case}' fails with margin {margins[case]:.3e}", margins[case])
    lam = general_eigen(X).values
    if f.entire:
        # any curve around the spectrum will do
        return strip_contour(lam, -np.inf, np.inf)
    if case == "upper_half":
        return upper_contour(lam, f.domain.a, f.domain.b)
    return strip_contour(lam, f.domain.a, f.domain.b)


def _contour_calc(f, X, case, tol, check_resolvent=True) -> CalcResult:
    contour = build_contour(X, f, case)

    def kernel(zeta, R):
        return f.evaluate(zeta)[:, None, None] * R

    q = integrate(contour, X, kernel, tol, check_resolvent)
    return CalcResult(q.value, "contour", q.est_error, q.nodes_used, case, contour, q.history)


def _eigen_calc(f, X, case) -> CalcResult | None:
    spec = general_eigen(X)
    if spec.vector_condition > ILL_CONDITIONED:
        return None
    lam = spec.values
    if not np.all(f.in_region(lam, ENDPOINT_CLEARANCE)):
        return None
    V = spec.right_vectors
    fl = f.evaluate(lam)
    value = np.linalg.solve(V.T, (V * fl).T).T
    err = spec.vector_condition * EPS * (1.0 + float(np.max(np.abs(fl)))) * X.shape[0]
    return CalcResult(value, "eigen", err, 0, case)


def analytic_calc(f: FunctionSpec, X, path: str = "auto", tol: float = CALC_TOL, check_resolvent: bool = True) -> CalcResult:
    """``f(X)`` by diagonalization (``eigen``), Cauchy integral (``contour``)
    or diagonalization with contour fallback (``auto``)."""
    X = as_matrix(X)
    if path not in ("auto", "eigen", "contour"):
        raise ValueError(f"unknown path {path!r}")
    case = select_case(f, X)
    if case == "lower_half":
        # reflection: f(X) = f(X*)*
        res = analytic_calc(f, X.conj().T, path, tol, check_resolvent)
        res.value = res.value.conj().T
        res.case = "lower_half"
        return res
    if path in ("auto", "eigen"):
        res = _eigen_calc(f, X, case)
        if res is not None:
            return res
        if path == "eigen":
            raise DomainError("eigenvector matrix is ill-conditioned (> 1e6); use the contour path")
    return _contour_calc(f, X, case, tol, check_resolvent)


def calc_both(f: FunctionSpec, X, tol: float = CALC_TOL) -> dict:
    """Eigen and contour values side by side with their relative difference."""
    c = analytic_calc(f, X, "contour", tol)
    out = {"contour": c}
    try:
        e = analytic_calc(f, X, "eigen", tol)
    except DomainError:
        e = None
    out["eigen"] = e
    out["rel_diff"] = None if e is None else fro(e.value - c.value) / (1.0 + fro(c.value))
    return out
