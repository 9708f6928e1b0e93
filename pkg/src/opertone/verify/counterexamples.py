"""Searches for scalar and 2x2 witnesses at the edges of the theory.

``remark35_im(p)``
    ``a, b > 0`` with ``Im (a + ib)^p < 0``. By homogeneity only the angle
    matters: ``Im (a+ib)^p = r^p sin(p theta)`` goes negative exactly when
    ``p theta > pi`` for some ``theta < pi/2``, i.e. when ``p > 2``.
``remark35_re(p)``
    ``a, b > 0`` with ``Re (a + ib)^p > a^p``, i.e.
    ``cos(p theta) > cos(theta)^p``; possible exactly when ``p < 1`` or ``p > 3``.
``remark48``
    Positive definite ``A, B`` (2x2) with ``AB + BA`` not positive semidefinite.

Candidates are screened in floating point and every witness is re-verified
independently before it is returned: the scalar ones with ``mpmath`` at 60
digits, the matrix one in exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from ..sampler import make_rng

KINDS = ("remark35_im", "remark35_re", "remark48")
DEFAULT_BUDGET = 4096
# a float candidate must clear this relative gap before it is re-verified
SCREEN = 1e-12
MP_DPS = 60


@dataclass
class SearchResult:
    kind: str
    p: float | None
    budget: int
    found: bool
    expected: bool
    evaluated: int
    witness: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def matches_expectation(self) -> bool:
        return self.found == self.expected

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "p": self.p,
            "budget": self.budget,
            "found": self.found,
            "expected_found": self.expected,
            "matches_expectation": self.matches_expectation,
            "evaluated": self.evaluated,
            "witness": self.witness,
            "notes": list(self.notes),
        }


def expected_found(kind: str, p: float | None = None) -> bool:
    """Whether a witness exists, from the exact scalar analysis."""
    if kind == "remark35_im":
        return p > 2
    if kind == "remark35_re":
        return p < 1 or p > 3
    if kind == "remark48":
        return True
    raise ValueError(f"unknown counterexample kind {kind!r}; expected one of {KINDS}")


def _angles(budget: int, rng) -> np.ndarray:
    # half on a midpoint grid of (0, pi/2), half random
    grid = (np.arange(budget - budget // 2) + 0.5) / (budget - budget // 2) * (np.pi / 2)
    extra = rng.uniform(0.0, np.pi / 2, budget // 2)
    return np.concatenate([grid, extra[extra > 0]])


def _mp_point(theta):
    a = mpmath.mpf(float(np.cos(theta)))
    b = mpmath.mpf(float(np.sin(theta)))
    return a, b


def _verify_im(a, b, p):
    with mpmath.workdps(MP_DPS):
        val = mpmath.power(mpmath.mpc(a, b), mpmath.mpf(p)).imag
        return val, bool(val < -mpmath.mpf(10) ** (-40))


def _verify_re(a, b, p):
    with mpmath.workdps(MP_DPS):
        z = mpmath.power(mpmath.mpc(a, b), mpmath.mpf(p))
        gap = z.real - mpmath.power(a, p)
        return gap, bool(gap > mpmath.mpf(10) ** (-40))


def _scalar_search(kind, p, budget, rng) -> SearchResult:
    theta = _angles(budget, rng)
    z = np.exp(1j * theta)
    w = z ** float(p)
    if kind == "remark35_im":
        score = -w.imag
    else:
        score = w.real - np.cos(theta) ** p
    order = np.argsort(-score)
    res = SearchResult(kind, float(p), budget, False, expected_found(kind, p), len(theta))
    for i in order[:16]:
        if score[i] <= SCREEN:
            break
        a, b = _mp_point(theta[i])
        val, ok = (_verify_im if kind == "remark35_im" else _verify_re)(a, b, p)
        if ok:
            res.found = True
            res.witness = {
                "a": float(a),
                "b": float(b),
                "theta_over_pi": float(theta[i] / np.pi),
                "value": float(score[i]),
                "verified_value": mpmath.nstr(val, 20),
            }
            return res
        res.notes.append(f"float candidate at theta={theta[i]!r} rejected by high-precision check")
    return res


def _rational(M):
    return [[Fraction(float(x)) for x in row] for row in M]


def _det2(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def _mul2(X, Y):
    return [[sum(X[i][k] * Y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]


def _pd_exact(M) -> bool:
    return M[0][1] == M[1][0] and M[0][0] > 0 and _det2(M) > 0


def _random_pd(rng):
    # real symmetric with a random condition number up to 1e3
    theta = rng.uniform(0.0, np.pi)
    c, s = np.cos(theta), np.sin(theta)
    U = np.array([[c, -s], [s, c]])
    lam = np.exp(rng.uniform(np.log(1e-3), 0.0, 2))
    M = (U * lam) @ U.T
    return 0.5 * (M + M.T)


def _matrix_search(budget, rng) -> SearchResult:
    res = SearchResult("remark48", None, budget, False, True, 0)
    for t in range(budget):
        res.evaluated = t + 1
        A = _random_pd(rng)
        B = _random_pd(rng)
        S = A @ B + B @ A
        if np.linalg.eigvalsh(0.5 * (S + S.T))[0] >= -SCREEN * np.linalg.norm(S):
            continue
        Aq, Bq = _rational(A), _rational(B)
        Aq[1][0] = Aq[0][1]
        Bq[1][0] = Bq[0][1]
        if not (_pd_exact(Aq) and _pd_exact(Bq)):
            continue
        AB, BA = _mul2(Aq, Bq), _mul2(Bq, Aq)
        Sq = [[AB[i][j] + BA[i][j] for j in range(2)] for i in range(2)]
        det = _det2(Sq)
        if det < 0:
            res.found = True
            res.witness = {
                "A": [[float(x) for x in row] for row in Aq],
                "B": [[float(x) for x in row] for row in Bq],
                "det_AB_plus_BA": float(det),
                "det_exact_sign": -1,
                "min_eig_AB_plus_BA": float(np.linalg.eigvalsh(0.5 * (S + S.T))[0]),
            }
            return res
    return res


def counterexample_search(kind: str, p: float | None = None, budget: int = DEFAULT_BUDGET, seed: int = 0) -> SearchResult:
    """Search for a witness; ``not found`` is a normal result, not an error."""
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    rng = make_rng(seed)
    if kind in ("remark35_im", "remark35_re"):
        if p is None or not p > 0:
            raise ValueError(f"{kind} needs an exponent p > 0, got {p}")
        return _scalar_search(kind, p, budget, rng)
    if kind == "remark48":
        return _matrix_search(budget, rng)
    raise ValueError(f"unknown counterexample kind {kind!r}; expected one of {KINDS}")
