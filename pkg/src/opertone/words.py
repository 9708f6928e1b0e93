"""Sums of words in two matrices.

``F_{p,q}(A, B)`` is the sum of all products of ``p`` copies of ``A`` and
``q`` copies of ``B`` in every order. It gives the directional derivatives of
monomials: ``D^q x^(p+q) (A; B) = q! F_{p,q}(A, B)``.
"""

from __future__ import annotations

from itertools import combinations
from math import comb, factorial

import numpy as np


def poly_word_sum(l: int, m: int, A, B) -> np.ndarray:
    """``F_{l-m,m}(A, B)`` by enumerating all ``C(l, m)`` words directly."""
    if not 0 <= m <= l:
        raise ValueError(f"need 0 <= m <= l, got l={l}, m={m}")
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    total = np.zeros((n, n), dtype=complex)
    for positions in combinations(range(l), m):
        word = np.eye(n, dtype=complex)
        chosen = set(positions)
        for slot in range(l):
            word = word @ (B if slot in chosen else A)
        total += word
    return total


def word_sum_table(A, B, max_p: int, max_q: int) -> np.ndarray:
    """All ``F_{p,q}`` for ``p <= max_p``, ``q <= max_q`` by the recursion
    ``F_{p,q} = A F_{p-1,q} + B F_{p,q-1}`` (first letter of each word)."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    n = A.shape[0]
    F = np.zeros((max_p + 1, max_q + 1, n, n), dtype=complex)
    F[0, 0] = np.eye(n)
    for p in range(max_p + 1):
        for q in range(max_q + 1):
            if p == 0 and q == 0:
                continue
            acc = np.zeros((n, n), dtype=complex)
            if p > 0:
                acc += A @ F[p - 1, q]
            if q > 0:
                acc += B @ F[p, q - 1]
            F[p, q] = acc
    return F


def poly_derivatives(coeffs, A, B, max_order: int) -> list[np.ndarray]:
    """``D^m P(A; B)`` for ``m = 0..max_order`` with ``P = sum c_l x^l``."""
    coeffs = [float(c) for c in coeffs]
    n = np.asarray(A).shape[0]
    deg = len(coeffs) - 1
    out = [np.zeros((n, n), dtype=complex) for _ in range(max_order + 1)]
    if deg < 0:
        return out
    F = word_sum_table(A, B, deg, min(deg, max_order))
    for l, c in enumerate(coeffs):
        if c == 0.0:
            continue
        for m in range(min(l, max_order) + 1):
            out[m] += c * factorial(m) * F[l - m, m]
    return out


def compose_affine(coeffs, scale: float, shift: float) -> np.ndarray:
    """Coefficients in ``x`` of ``Q(scale * x + shift)`` from those of ``Q``."""
    deg = len(coeffs) - 1
    out = np.zeros(max(deg + 1, 1))
    for j, c in enumerate(coeffs):
        for i in range(j + 1):
            out[i] += c * comb(j, i) * scale**i * shift ** (j - i)
    return out
