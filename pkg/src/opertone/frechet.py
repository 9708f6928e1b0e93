"""Directional derivatives ``D^m f(A; B)`` by four independent engines.

``contour``
    The Cauchy formula ``m!/(2 pi i) int f(z) ((zI - X)^{-1} Z)^m (zI - X)^{-1} dz``.
``divided_diff``
    In the eigenbasis of ``A``: ``m! sum f[l_i0, ..., l_im] B_i0i1 ... B_im-1im``.
``finite_diff``
    Central differences of ``t -> f(A + tB)`` with Richardson extrapolation.
``closed_form``
    Resolvent factorizations of the representation atoms.

``auto`` uses the closed form when the spec has one, divided differences
otherwise, and the contour engine when the divided-difference tensor would
be too large.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement

import numpy as np

from .errors import DomainError, OpertoneError
from .funcalc.calc import analytic_calc, build_contour, calc_hermitian, select_case
from .funcalc.contour import ENDPOINT_CLEARANCE, integrate
from .matcore import EPS, as_hermitian, as_matrix, fro, hermitian_eigen, hermitian_part
from .repfun.closed_form import closed_form_derivatives, has_closed_form
from .repfun.spec import FunctionSpec
from .tensors import DerivativeTensor, TaylorSums

FRECHET_TOL = 1e-10
MAX_TENSOR_ENTRIES = 4_000_000
ENGINE_ALIASES = {
    "contour": "contour",
    "divided": "divided_diff",
    "divided_diff": "divided_diff",
    "fd": "finite_diff",
    "finite_diff": "finite_diff",
    "closed": "closed_form",
    "closed_form": "closed_form",
    "auto": "auto",
}


def _is_hermitian(M) -> bool:
    return fro(M - M.conj().T) <= 1e-12 * (1.0 + fro(M))


# ------------------------------------------------------------------ contour


def frechet_contour(f: FunctionSpec, X, Z, m: int, tol: float = FRECHET_TOL) -> DerivativeTensor:
    """Quadrature of the Cauchy formula for the ``m``-th derivative."""
    X = as_matrix(X)
    Z = as_matrix(Z)
    if not 0 <= m <= 12:
        raise ValueError(f"order must be in [0, 12], got {m}")
    case = select_case(f, X)
    if case == "lower_half":
        res = frechet_contour(f, X.conj().T, Z.conj().T, m, tol)
        return DerivativeTensor(m, res.value.conj().T, "contour", res.est_error, False, res.flags)
    contour = build_contour(X, f, case)
    scale = math.factorial(m)

    def kernel(zeta, R):
        P = R
        for _ in range(m):
            P = R @ Z @ P
        return (scale * f.evaluate(zeta))[:, None, None] * P

    q = integrate(contour, X, kernel, tol)
    herm = _is_hermitian(X) and _is_hermitian(Z)
    value = hermitian_part(q.value) if herm else q.value
    return DerivativeTensor(m, value, "contour", q.est_error, herm, (f"nodes={q.nodes_used}",))


# ------------------------------------------------------------------ divided differences


def _dd_lookup(f: FunctionSpec, lam, m: int):
    """Divided differences on every sorted index tuple, with their base-n codes."""
    n = len(lam)
    combos = np.array(list(combinations_with_replacement(range(n), m + 1)), dtype=np.int64)
    vals = f.divided_differences(lam[combos])
    powers = n ** np.arange(m, -1, -1, dtype=np.int64)
    return vals, combos @ powers, powers


def _gather(vals, codes, powers, grid):
    grid = np.sort(grid, axis=1)
    key = np.zeros(len(grid), dtype=np.int64)
    for j in range(grid.shape[1]):
        key += grid[:, j].astype(np.int64) * powers[j]
    return vals[np.searchsorted(codes, key)]


def dd_tensor(f: FunctionSpec, lam, m: int) -> np.ndarray:
    """Full tensor ``T[i0, ..., im] = f[lam_i0, ..., lam_im]``.

    Only the sorted index tuples are evaluated; the symmetric tensor is then
    gathered from them.
    """
    lam = np.asarray(lam, dtype=float)
    n = len(lam)
    vals, codes, powers = _dd_lookup(f, lam, m)
    grid = np.indices((n,) * (m + 1), dtype=np.int8).reshape(m + 1, -1).T
    return _gather(vals, codes, powers, grid).reshape((n,) * (m + 1))


def _dd_contract(f: FunctionSpec, lam, Bt, m: int) -> tuple[np.ndarray, float]:
    """``sum T[i0..im] Bt[i0,i1] ... Bt[im-1,im]`` one ``i0`` slice at a time."""
    n = len(lam)
    vals, codes, powers = _dd_lookup(f, lam, m)
    tail = np.indices((n,) * m, dtype=np.int8).reshape(m, -1).T
    core = np.zeros((n, n), dtype=complex)
    for i0 in range(n):
        grid = np.concatenate([np.full((len(tail), 1), i0, dtype=np.int8), tail], axis=1)
        T = _gather(vals, codes, powers, grid).reshape((n,) * m)
        ops = [T, list(range(m)), Bt[i0], [0]]
        for j in range(m - 1):
            ops += [Bt, [j, j + 1]]
        core[i0] = np.einsum(*ops, [m - 1], optimize=True)
    return core, float(np.max(np.abs(vals)))


def frechet_divided_diff(f: FunctionSpec, A, B, m: int) -> DerivativeTensor:
    """Spectral (divided-difference) formula in the eigenbasis of ``A``."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    n = A.shape[0]
    spec = hermitian_eigen(A)
    lam = spec.values
    bad = ~f.domain.contains(lam, ENDPOINT_CLEARANCE)
    if np.any(bad):
        v = float(lam[np.argmax(bad)])
        raise DomainError(f"eigenvalue {v!r} of A is outside {f.domain.text()}", v)
    if n**m > MAX_TENSOR_ENTRIES:
        res = frechet_contour(f, A, B, m)
        return DerivativeTensor(m, res.value, "contour", res.est_error, True, ("divided_diff_too_large",))
    U = spec.right_vectors
    Bt = U.conj().T @ B @ U
    if m == 0:
        core = f.evaluate(lam).real.astype(complex)
        top = float(np.max(np.abs(core)))
        core = np.diag(core)
    else:
        core, top = _dd_contract(f, lam, Bt, m)
        core *= math.factorial(m)
    value = hermitian_part(U @ core @ U.conj().T)
    scale = top * math.factorial(m) * max(1.0, fro(B)) ** m
    err = 1e2 * EPS * (1.0 + scale) * n
    return DerivativeTensor(m, value, "divided_diff", err, True)


# ------------------------------------------------------------------ finite differences

FD_LEVELS = 3
FD_STEP_FACTOR = 3.0
FD_SAFETY = 3.0


def _central_weights(m: int):
    """Offsets (in units of h) and weights of the m-th central difference."""
    offsets = np.arange(m + 1) - 0.5 * m
    weights = np.array([(-1) ** (m - j) * math.comb(m, j) for j in range(m + 1)], dtype=float)
    return offsets, weights


def frechet_fd_oracle(f: FunctionSpec, A, B, m: int) -> DerivativeTensor:
    """Central differences of ``t -> f(A + tB)`` with Richardson extrapolation.

    Steps ``h, h/2, h/4`` are combined by Neville extrapolation in ``h^2``;
    ``est_error`` adds the last extrapolation correction to a roundoff bound
    ``2^m eps |f| / h_min^m`` amplified by the extrapolation weights.
    """
    A = as_hermitian(A)
    B = as_hermitian(B)
    if not 0 <= m <= 6:
        raise ValueError(f"finite differences support orders 0..6, got {m}")
    F0 = calc_hermitian(f, A)
    if m == 0:
        return DerivativeTensor(0, F0, "finite_diff", 1e2 * EPS * (1.0 + fro(F0)), True)
    lam = hermitian_eigen(A).values
    gap = float(np.min(f.domain.gap(lam)))
    nb = float(np.linalg.norm(B, 2))
    if nb == 0.0:
        return DerivativeTensor(m, np.zeros_like(A), "finite_diff", 0.0, True)
    # length scale on which f varies near sigma(A)
    length = min(gap, 1.0 + float(np.max(np.abs(lam))))
    h = FD_STEP_FACTOR * length * EPS ** (1.0 / (m + 2 * FD_LEVELS)) / nb
    reach = 0.5 * m * h * nb
    if reach > 0.9 * gap:
        h *= 0.9 * gap / reach
    if h * nb < 1e3 * EPS * (1.0 + fro(A)):
        raise DomainError(f"domain too tight for a difference stencil (gap {gap:.3e})", gap)
    offsets, weights = _central_weights(m)
    table = []
    for level in range(FD_LEVELS):
        hl = h / 2**level
        acc = sum(w * calc_hermitian(f, A + (o * hl) * B) for o, w in zip(offsets, weights))
        table.append(acc / hl**m)
    # Neville extrapolation in h^2
    est = 0.0
    for j in range(1, FD_LEVELS):
        factor = 4.0**j
        new = [(factor * table[i + 1] - table[i]) / (factor - 1.0) for i in range(len(table) - 1)]
        est = fro(new[-1] - table[-1])
        table = new
    value = hermitian_part(table[0])
    hmin = h / 2 ** (FD_LEVELS - 1)
    noise = EPS * (1.0 + fro(F0)) * (1.0 + fro(A)) / length
    roundoff = 2.0**m * noise / hmin**m * 3.0 ** (FD_LEVELS - 1)
    return DerivativeTensor(m, value, "finite_diff", FD_SAFETY * (est + roundoff), True, (f"h={h:.3e}",))


# ------------------------------------------------------------------ closed form


def frechet_closed_form(f: FunctionSpec, A, B, m: int) -> DerivativeTensor:
    vals = closed_form_derivatives(f, A, B, m)
    v = vals[m]
    return DerivativeTensor(m, hermitian_part(v), "closed_form", 1e2 * EPS * (1.0 + fro(v)) * (m + 1), True)


# ------------------------------------------------------------------ dispatch


def resolve_engine(f: FunctionSpec, engine: str) -> str:
    try:
        name = ENGINE_ALIASES[engine]
    except KeyError:
        raise ValueError(f"unknown engine {engine!r}") from None
    if name == "auto":
        return "closed_form" if has_closed_form(f) else "divided_diff"
    if name == "closed_form" and not has_closed_form(f):
        raise OpertoneError(f"no closed form available for '{f.text()}'")
    return name


def frechet(f: FunctionSpec, A, B, m: int, engine: str = "auto") -> DerivativeTensor:
    name = resolve_engine(f, engine)
    if name == "contour":
        return frechet_contour(f, as_hermitian(A), as_hermitian(B), m)
    if name == "divided_diff":
        return frechet_divided_diff(f, A, B, m)
    if name == "finite_diff":
        return frechet_fd_oracle(f, A, B, m)
    return frechet_closed_form(f, A, B, m)


def frechet_series(f: FunctionSpec, A, B, max_order: int, engine: str = "auto") -> list[DerivativeTensor]:
    """``D^m f(A; B)`` for ``m = 0..max_order`` from a single engine."""
    name = resolve_engine(f, engine)
    if name == "closed_form":
        vals = closed_form_derivatives(f, A, B, max_order)
        return [
            DerivativeTensor(m, hermitian_part(v), "closed_form", 1e2 * EPS * (1.0 + fro(v)) * (m + 1), True)
            for m, v in enumerate(vals)
        ]
    return [frechet(f, A, B, m, name) for m in range(max_order + 1)]


def taylor_sums(f: FunctionSpec, A, B, K: int, engine: str = "auto", max_order: int | None = None) -> TaylorSums:
    """Alternating even/odd partial sums for ``m = 0..K``.

    ``even[k] = sum_{m<=k} (-1)^m D^{2m} / (2m)!`` and
    ``odd[k] = sum_{1<=m<=k} (-1)^(m-1) D^{2m-1} / (2m-1)!``. Derivatives
    beyond ``max_order`` (default ``2K``) are not computed; sums that would
    need them stop at the last available order.
    """
    top = 2 * K if max_order is None else max_order
    ders = frechet_series(f, A, B, top, engine)
    n = as_matrix(A).shape[0]
    even, odd = [], [np.zeros((n, n), dtype=complex)]
    acc = np.zeros((n, n), dtype=complex)
    for k in range(K + 1):
        if 2 * k <= top:
            acc = acc + (-1) ** k / math.factorial(2 * k) * ders[2 * k].value
        even.append(acc)
    acc = np.zeros((n, n), dtype=complex)
    for k in range(1, K + 1):
        if 2 * k - 1 <= top:
            acc = acc + (-1) ** (k - 1) / math.factorial(2 * k - 1) * ders[2 * k - 1].value
        odd.append(acc)
    return TaylorSums(even, odd, ders[0].engine if ders else engine, ders)


def calc_complex(f: FunctionSpec, A, B, path: str = "auto"):
    """``f(A + iB)`` (convenience wrapper)."""
    return analytic_calc(f, as_hermitian(A) + 1j * as_hermitian(B), path)
