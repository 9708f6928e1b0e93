"""Random functions drawn from the certified representation families."""

from __future__ import annotations

import numpy as np

from .spec import (
    KTONE_LAMBDA_MARGIN,
    MINUS_ONE_ONE,
    POSITIVE,
    Convex,
    Decreasing,
    FunctionSpec,
    KTone,
    Monotone,
)

CLASSES = ("ktone", "monotone", "decreasing", "convex")
WEIGHT_RANGE = (1e-2, 1.0)
POS_LAMBDA_RANGE = (1e-2, 1e2)


def _log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def random_certified(cls: str, seed=None, atom_count: int = 3, k: int | None = None, rng=None) -> FunctionSpec:
    """Draw a representation-form spec of class ``cls``.

    ``cls`` is one of ``ktone`` (needs ``k``), ``monotone``, ``decreasing``
    or ``convex``. Weights are log-uniform in [1e-2, 1]. For ``ktone`` the
    atoms sit in [-1 + 1e-3, 1 - 1e-3]; on (0, inf) they are log-uniform in
    [1e-2, 1e2].
    """
    if rng is None:
        rng = np.random.Generator(np.random.PCG64(seed))
    if not 0 <= atom_count <= 16:
        raise ValueError(f"atom_count must be in [0, 16], got {atom_count}")
    w = _log_uniform(rng, *WEIGHT_RANGE, atom_count)
    if cls == "ktone":
        if k is None or not 1 <= k <= 12:
            raise ValueError(f"ktone needs 1 <= k <= 12, got {k}")
        edge = 1.0 - KTONE_LAMBDA_MARGIN
        lam = rng.uniform(-edge, edge, atom_count)
        poly = tuple(float(c) for c in rng.normal(0.0, 0.5, k))
        atoms = tuple(zip(w.tolist(), lam.tolist()))
        return FunctionSpec(MINUS_ONE_ONE, KTone(k, poly, atoms))
    lam = _log_uniform(rng, *POS_LAMBDA_RANGE, atom_count)
    atoms = tuple(zip(w.tolist(), lam.tolist()))
    if cls == "monotone":
        alpha, beta = rng.uniform(0.0, 1.0, 2)
        return FunctionSpec(POSITIVE, Monotone(float(alpha), float(beta), atoms))
    if cls == "decreasing":
        alpha = rng.uniform(0.0, 1.0)
        return FunctionSpec(POSITIVE, Decreasing(float(alpha), 0.0, atoms))
    if cls == "convex":
        c0, c1 = rng.normal(0.0, 1.0, 2)
        gamma = rng.uniform(0.0, 1.0)
        return FunctionSpec(POSITIVE, Convex(float(c0), float(c1), float(gamma), atoms))
    raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")


def log1p_monotone_rep(nodes: int = 8) -> FunctionSpec:
    """Atomic monotone representation approximating ``log(1 + x)``.

    From ``log(1 + x) = int_0^1 x / (1 + u x) du`` with Gauss-Legendre nodes
    ``u_j``: atoms ``x / (x + 1/u_j)`` with weights ``W_j / u_j``.
    """
    u, W = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (u + 1.0)
    W = 0.5 * W
    atoms = tuple((float(wj / uj), float(1.0 / uj)) for wj, uj in zip(W, u))
    return FunctionSpec(POSITIVE, Monotone(0.0, 0.0, atoms))
