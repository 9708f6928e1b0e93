"""Closed-form directional derivatives of representation atoms.

The resolvent ``g(x) = 1/(1 - lam x)`` factorizes as
``D^m g(A; B) = m! S C^m S`` with ``S = (I - lam A)^{-1/2}`` and
``C = lam S B S``; the shifted inverse ``1/(x + s)`` has the analogous
``(-1)^m m! S C^m S`` with ``S = (A + s)^{-1/2}``, ``C = S B S``. Every
representation form is a finite combination of these and polynomials, so
its derivatives follow without quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from ..errors import DomainError
from ..matcore import as_hermitian, hermitian_eigen, hermitian_part
from ..tensors import DerivativeTensor
from ..words import poly_derivatives
from .spec import Builtin, Convex, Decreasing, FunctionSpec, KTone, Monotone, Rescaled, _nonneg_int

# below this |lam| the lam^(-l) split of the ktone atom cancels badly
SPLIT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ResolventFactorization:
    """``inv_sqrt`` and ``c_matrix`` for one atom.

    kind ``ktone``: ``(I - lam A)^{-1/2}`` and ``lam S B S``;
    kind ``shifted``: ``(A + lam I)^{-1/2}`` and ``S B S``;
    kind ``pick``: ``B^{-1/2}`` and ``B^{-1/2} (I - lam A) B^{-1/2}``.
    """

    lam: float
    inv_sqrt: np.ndarray
    c_matrix: np.ndarray
    kind: str = "ktone"


def _inv_sqrt(H, what):
    spec = hermitian_eigen(H)
    lo = spec.values[0]
    if lo <= 0:
        raise DomainError(f"{what} is not positive definite (min eigenvalue {lo:.3e})", lo)
    U = spec.right_vectors
    return hermitian_part((U / np.sqrt(spec.values)) @ U.conj().T)


def resolvent_factorization(lam: float, A, B, kind: str = "ktone") -> ResolventFactorization:
    A = as_hermitian(A)
    B = as_hermitian(B)
    eye = np.eye(A.shape[0])
    if kind == "ktone":
        S = _inv_sqrt(eye - lam * A, "I - lambda A")
        C = lam * (S @ B @ S)
    elif kind == "shifted":
        S = _inv_sqrt(A + lam * eye, "A + lambda I")
        C = S @ B @ S
    elif kind == "pick":
        S = _inv_sqrt(B, "B")
        C = S @ (eye - lam * A) @ S
    else:
        raise ValueError(f"unknown factorization kind {kind!r}")
    return ResolventFactorization(float(lam), S, hermitian_part(C), kind)


def _sandwich_powers(fac: ResolventFactorization, max_order: int, sign: float):
    """``sign^m m! S C^m S`` for ``m = 0..max_order``."""
    S, C = fac.inv_sqrt, fac.c_matrix
    out = []
    P = np.eye(S.shape[0], dtype=complex)
    for m in range(max_order + 1):
        if m:
            P = P @ C
        out.append(hermitian_part(sign**m * factorial(m) * (S @ P @ S)))
    return out


def resolvent_derivatives(lam, A, B, max_order):
    """``D^m (1/(1 - lam x))(A; B)`` for ``m = 0..max_order``."""
    return _sandwich_powers(resolvent_factorization(lam, A, B, "ktone"), max_order, 1.0)


def shifted_inverse_derivatives(s, A, B, max_order):
    """``D^m (1/(x + s))(A; B)`` for ``m = 0..max_order``."""
    return _sandwich_powers(resolvent_factorization(s, A, B, "shifted"), max_order, -1.0)


def ktone_atom_derivatives(l, lam, A, B, max_order):
    """``D^m (x^l / (1 - lam x))(A; B)`` for ``m = 0..max_order``."""
    if lam == 0.0:
        mono = [0.0] * l + [1.0]
        return poly_derivatives(mono, A, B, max_order)
    if abs(lam) >= SPLIT_THRESHOLD:
        # x^l/(1 - lam x) = lam^{-l}/(1 - lam x) - sum_{i<l} lam^{i-l} x^i
        res = resolvent_derivatives(lam, A, B, max_order)
        poly = [-(lam ** (i - l)) for i in range(l)]
        pd = poly_derivatives(poly, A, B, max_order)
        return [lam ** (-l) * r + p for r, p in zip(res, pd)]
    # Leibniz rule: D^m(gh) = sum_r C(m, r) D^r g D^{m-r} h
    mono = poly_derivatives([0.0] * l + [1.0], A, B, max_order)
    res = resolvent_derivatives(lam, A, B, max_order)
    out = []
    for m in range(max_order + 1):
        acc = sum(comb(m, r) * (mono[r] @ res[m - r]) for r in range(min(m, l) + 1))
        out.append(hermitian_part(acc))
    return out


def exact_frechet_atom(kind: str, lam: float, l: int, A, B, m: int) -> DerivativeTensor:
    """Closed-form ``D^m`` of ``1/(1 - lam x)`` (kind ``resolvent``) or of
    ``x^l / (1 - lam x)`` (kind ``ktone_atom``) at ``(A, B)``."""
    if not -1.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [-1, 1], got {lam}", lam)
    if kind == "resolvent":
        val = resolvent_derivatives(lam, A, B, m)[m]
    elif kind == "ktone_atom":
        val = ktone_atom_derivatives(l, lam, A, B, m)[m]
    else:
        raise ValueError(f"unknown atom kind {kind!r}")
    return DerivativeTensor(m, val, "closed_form")


def has_closed_form(f: FunctionSpec) -> bool:
    form = f.form
    if isinstance(form, Builtin):
        return form.name in ("id", "const", "inv") or (form.name == "pow" and _nonneg_int(form.param))
    if isinstance(form, Rescaled):
        return has_closed_form(form.base)
    return isinstance(form, (KTone, Monotone, Decreasing, Convex))


def closed_form_derivatives(f: FunctionSpec, A, B, max_order: int) -> list[np.ndarray]:
    """``D^m f(A; B)`` for ``m = 0..max_order`` from the representation.

    Raises ``NotImplementedError`` for builtins without a closed form.
    """
    A = as_hermitian(A)
    B = as_hermitian(B)
    n = A.shape[0]
    eye = np.eye(n)
    form = f.form
    zero = [np.zeros((n, n), dtype=complex) for _ in range(max_order + 1)]

    def add(acc, terms, w=1.0):
        return [a + w * t for a, t in zip(acc, terms)]

    if isinstance(form, Builtin):
        name = form.name
        if name == "id":
            return poly_derivatives([0.0, 1.0], A, B, max_order)
        if name == "const":
            return poly_derivatives([form.param], A, B, max_order)
        if name == "inv":
            return shifted_inverse_derivatives(0.0, A, B, max_order)
        if name == "pow" and _nonneg_int(form.param):
            return poly_derivatives([0.0] * int(form.param) + [1.0], A, B, max_order)
        raise NotImplementedError(f"no closed form for builtin {name}")
    if isinstance(form, KTone):
        s, t = f._ktone_map
        Ay, By = s * A + t * eye, s * B
        acc = poly_derivatives(list(form.poly), Ay, By, max_order) if form.poly else zero
        for w, lam in form.atoms:
            acc = add(acc, ktone_atom_derivatives(form.l, lam, Ay, By, max_order), w)
        return acc
    if isinstance(form, Monotone):
        acc = poly_derivatives([form.alpha, form.beta], A, B, max_order)
        for w, lam in form.atoms:
            # x/(x + lam) = 1 - lam/(x + lam)
            inv = shifted_inverse_derivatives(lam, A, B, max_order)
            acc = add(acc, inv, -w * lam)
            acc[0] = acc[0] + w * eye
        return acc
    if isinstance(form, Decreasing):
        acc = poly_derivatives([form.alpha, form.beta], A, B, max_order)
        for w, lam in form.atoms:
            acc = add(acc, shifted_inverse_derivatives(lam, A, B, max_order), w)
        return acc
    if isinstance(form, Convex):
        c0, c1, g = form.c0, form.c1, form.gamma
        acc = poly_derivatives([c0 - c1 + g, c1 - 2 * g, g], A, B, max_order)
        for w, lam in form.atoms:
            # (x-1)^2/(x + lam) = x - (2 + lam) + (1 + lam)^2/(x + lam)
            lin = poly_derivatives([-(2.0 + lam), 1.0], A, B, max_order)
            inv = shifted_inverse_derivatives(lam, A, B, max_order)
            acc = add(add(acc, lin, w), inv, w * (1.0 + lam) ** 2)
        return acc
    if isinstance(form, Rescaled):
        a2 = (A - form.shift * eye) / form.scale
        b2 = B / form.scale
        return closed_form_derivatives(form.base, a2, b2, max_order)
    raise NotImplementedError(f"no closed form for {type(form).__name__}")


def pick_resolvent(lam: float, A, B) -> np.ndarray:
    """``(I - lam (A + iB))^{-1}`` through ``B^{-1/2} (C - i lam I)^{-1} B^{-1/2}``."""
    fac = resolvent_factorization(lam, A, B, "pick")
    n = fac.c_matrix.shape[0]
    inner = np.linalg.inv(fac.c_matrix - 1j * lam * np.eye(n))
    return fac.inv_sqrt @ inner @ fac.inv_sqrt
