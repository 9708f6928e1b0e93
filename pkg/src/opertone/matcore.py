"""Dense complex matrix helpers: validation, eigendecompositions, PSD margins.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The functions
``as_matrix`` and ``as_hermitian`` are the single entry points that enforce the
square/finite/Hermitian invariants; everything downstream assumes they ran.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DomainError, EigenError, ValidationError

EPS = np.finfo(float).eps
HERMITIAN_GATE = 1e-12
DEFAULT_TAU = 1e-8
ILL_CONDITIONED = 1e6
MAX_DIM = 64


def as_matrix(M) -> np.ndarray:
    """Return ``M`` as a square, finite complex array (a copy)."""
    X = np.array(M, dtype=complex)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2 or X.shape[0] != X.shape[1] or X.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {X.shape}")
    if X.shape[0] > MAX_DIM:
        raise ValidationError(f"dimension {X.shape[0]} exceeds the supported maximum {MAX_DIM}")
    if not np.all(np.isfinite(X)):
        raise ValidationError("matrix has non-finite entries")
    return X


def as_hermitian(M) -> np.ndarray:
    """Validate ``M`` as Hermitian and return its symmetrization ``(M + M*)/2``.

    The gate ``max|M - M*| <= 1e-12 (1 + max|M|)`` is applied before
    symmetrizing, so roundoff-level asymmetry is absorbed and anything larger
    is rejected.
    """
    X = as_matrix(M)
    dev = np.max(np.abs(X - X.conj().T))
    if dev > HERMITIAN_GATE * (1.0 + np.max(np.abs(X))):
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return 0.5 * (X + X.conj().T)


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.conj().T)


def fro(M) -> float:
    return float(np.linalg.norm(M))


def rel_diff(X, Y) -> float:
    """Frobenius difference relative to ``1 + |Y|_F``."""
    return fro(np.asarray(X) - np.asarray(Y)) / (1.0 + fro(Y))


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    right_vectors: np.ndarray
    vector_condition: float
    ill_conditioned: bool = False


def hermitian_eigen(H) -> Spectrum:
    """Eigendecomposition ``H = U diag(lam) U*`` with ascending ``lam``.

    Uses the divide-and-conquer driver first and falls back to plain QR
    iteration if that fails to converge. The residual ``|HU - U lam|`` is
    checked against ``1e-10 |H|`` before returning.
    """
    H = as_hermitian(H)
    try:
        lam, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError:
        try:
            lam, U = scipy.linalg.eigh(H, driver="ev")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenError(f"Hermitian eigensolver did not converge: {exc}") from exc
    residual = fro(H @ U - U * lam)
    if residual > 1e-10 * max(fro(H), 1.0):
        raise EigenError(f"Hermitian eigen residual {residual:.3e} too large", residual)
    return Spectrum(lam.astype(float), U, 1.0, False)


def _schur_eig(X: np.ndarray):
    T, Z = scipy.linalg.schur(X, output="complex")
    n = T.shape[0]
    lam = np.diag(T).copy()
    W = np.eye(n, dtype=complex)
    for k in range(n):
        for i in range(k - 1, -1, -1):
            s = T[i, i + 1 : k + 1] @ W[i + 1 : k + 1, k]
            d = lam[k] - T[i, i]
            if abs(d) < EPS * (1.0 + abs(lam[k])):
                d = EPS * (1.0 + abs(lam[k]))
            W[i, k] = s / d
    return lam, Z @ W


def general_eigen(X) -> Spectrum:
    """Eigenvalues and right eigenvectors of a general complex matrix.

    ``vector_condition`` is the 2-norm condition number of the eigenvector
    matrix with unit columns; above ``1e6`` the result is flagged.
    """
    X = as_matrix(X)
    try:
        lam, V = np.linalg.eig(X)
    except np.linalg.LinAlgError:
        try:
            lam, V = _schur_eig(X)
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise EigenError(f"general eigensolver did not converge: {exc}") from exc
    V = V / np.linalg.norm(V, axis=0)
    residual = fro(X @ V - V * lam)
    if residual > 1e-10 * max(fro(X), 1.0) * max(1.0, np.sqrt(X.shape[0])):
        raise EigenError(f"general eigen residual {residual:.3e} too large", residual)
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(V))
    if not np.isfinite(cond):
        cond = np.inf
    return Spectrum(lam, V, cond, cond > ILL_CONDITIONED)


def psd_margin(H) -> float:
    """Minimum eigenvalue of a Hermitian matrix."""
    return float(np.linalg.eigvalsh(as_hermitian(H))[0])


def psd_tolerance(H, tau_rel: float = DEFAULT_TAU, scale: float | None = None) -> float:
    s = fro(H) if scale is None else scale
    return tau_rel * (1.0 + s)


def is_psd(H, tau_rel: float = DEFAULT_TAU, scale: float | None = None) -> bool:
    return psd_margin(H) >= -psd_tolerance(H, tau_rel, scale)


def re_im_parts(M) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian decomposition ``M = Re M + i Im M``."""
    M = as_matrix(M)
    Mh = M.conj().T
    return 0.5 * (M + Mh), (M - Mh) / 2j


def hermitian_power(H, s: float) -> np.ndarray:
    """``H**s`` through the spectral decomposition.

    Non-integer or negative powers need ``H > 0``.
    """
    spec = hermitian_eigen(H)
    lam = spec.values
    integral = float(s).is_integer() and s >= 0
    if not integral and lam[0] <= 0:
        raise DomainError(f"power {s} needs a positive definite matrix (min eigenvalue {lam[0]:.3e})", lam[0])
    U = spec.right_vectors
    vals = lam ** int(s) if integral else lam**s
    return hermitian_part((U * vals) @ U.conj().T)


# ---------------------------------------------------------------- JSON I/O


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"n": int(M.shape[0]), "re": M.real.tolist(), "im": M.imag.tolist()}


def matrix_from_json(obj, hermitian: bool = False) -> np.ndarray:
    """Decode ``{"n", "re", "im"}``.

    For Hermitian input, ``im`` may be absent, may list only the upper
    triangle (row ``i`` holding ``n - i`` entries), or may carry ``null`` in
    the lower triangle; missing entries come from conjugate symmetry.
    """
    try:
        n = int(obj["n"])
        re = obj["re"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"matrix JSON needs 'n' and 're': {exc}") from exc
    R = _dense_rows(re, n, hermitian, "re")
    im = obj.get("im")
    I = np.zeros((n, n)) if im is None else _dense_rows(im, n, hermitian, "im")
    if hermitian:
        R = np.where(np.isnan(R), R.T, R)
        I = np.where(np.isnan(I), -I.T, I)
    M = R + 1j * I
    return as_hermitian(M) if hermitian else as_matrix(M)


def _dense_rows(rows, n, hermitian, name):
    if len(rows) != n:
        raise ValidationError(f"'{name}' has {len(rows)} rows, expected {n}")
    out = np.full((n, n), np.nan)
    for i, row in enumerate(rows):
        if len(row) == n:
            vals = [np.nan if v is None else float(v) for v in row]
            out[i] = vals
        elif hermitian and len(row) == n - i:
            out[i, i:] = [float(v) for v in row]
        else:
            raise ValidationError(f"'{name}' row {i} has {len(row)} entries, expected {n}")
    if not hermitian and np.any(np.isnan(out)):
        raise ValidationError(f"'{name}' has missing entries")
    return out


def load_matrix(path, hermitian: bool = False) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh), hermitian=hermitian)
