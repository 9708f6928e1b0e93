"""Seeded random matrix instances for every hypothesis class.

The bit generator is numpy's PCG64 (PCG XSL RR 128/64), a named portable
algorithm. For reference, ``PCG64(42).random_raw(4)`` is::

    [14276969152011380360, 8095878257575067585,
     15838336090824644132, 12864169557245331597]

Trial ``t`` of a campaign with seed ``s`` uses the 64-bit stream seed
``SeedSequence([s, t]).generate_state(1, uint64)[0]`` so results do not
depend on how trials are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import SamplerError, ValidationError
from .matcore import hermitian_eigen, hermitian_part, psd_margin
from .repfun.spec import Interval

PCG64_SEED42_FIRST4 = (
    14276969152011380360,
    8095878257575067585,
    15838336090824644132,
    12864169557245331597,
)
SECTOR_TRIES = 100


@dataclass(frozen=True)
class SampleConfig:
    n: int
    seed: int = 0
    margin: float = 1e-2
    scale: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValidationError(f"n must be a positive integer, got {self.n}")
        if not (0 < self.margin < 1):
            raise ValidationError(f"margin must be in (0, 1), got {self.margin}")
        if not self.scale > 0:
            raise ValidationError(f"scale must be positive, got {self.scale}")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "SampleConfig":
        return cls(int(obj["n"]), int(obj.get("seed", 0)), float(obj.get("margin", 1e-2)), float(obj.get("scale", 1.0)))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def trial_seed(seed: int, trial: int) -> int:
    """64-bit stream seed for trial ``trial`` of a campaign seeded with ``seed``."""
    return int(np.random.SeedSequence([int(seed), int(trial)]).generate_state(1, np.uint64)[0])


def _rng(cfg: SampleConfig, rng):
    return make_rng(cfg.seed) if rng is None else rng


def _ginibre(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def haar_unitary(n: int, rng) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    phases of ``diag(R)`` moved into ``Q``."""
    Q, R = np.linalg.qr(_ginibre(n, rng))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def _spectrum(n, interval: Interval, margin, rng):
    a, b = interval.a, interval.b
    if interval.finite:
        if not margin < 0.5 * (b - a):
            raise ValidationError(f"margin {margin} too large for {interval.text()}")
        return rng.uniform(a + margin, b - margin, n)
    logs = rng.uniform(math.log(margin), -math.log(margin), n)
    if math.isfinite(a):
        return a + np.exp(logs)
    if math.isfinite(b):
        return b - np.exp(logs)
    return rng.uniform(-1.0, 1.0, n) / margin


def rand_hermitian_in(cfg: SampleConfig, interval: Interval, rng=None) -> np.ndarray:
    """``U diag(lam) U*`` with Haar ``U`` and ``lam`` spread over the interval.

    Finite intervals: ``lam`` uniform in ``[a + margin, b - margin]``; half
    lines: log-uniform distance in ``[margin, 1/margin]`` from the endpoint.
    """
    rng = _rng(cfg, rng)
    lam = _spectrum(cfg.n, interval, cfg.margin, rng)
    U = haar_unitary(cfg.n, rng)
    A = hermitian_part((U * lam) @ U.conj().T)
    got = hermitian_eigen(A).values
    if not np.all(interval.contains(got)):
        raise SamplerError(f"sampled spectrum left {interval.text()}")
    return A


def rand_psd(cfg: SampleConfig, rng=None) -> np.ndarray:
    """``G* G`` scaled to spectral norm ``scale``."""
    rng = _rng(cfg, rng)
    G = _ginibre(cfg.n, rng)
    H = hermitian_part(G.conj().T @ G)
    H = cfg.scale * H / np.linalg.norm(H, 2)
    if psd_margin(H) < -1e-14 * cfg.scale:
        raise SamplerError("Gram matrix came out indefinite")
    return H


def rand_pd(cfg: SampleConfig, rng=None) -> np.ndarray:
    """``rand_psd + margin I``."""
    return rand_psd(cfg, rng) + cfg.margin * np.eye(cfg.n)


def rand_hermitian(cfg: SampleConfig, rng=None) -> np.ndarray:
    """``(G + G*)/2`` scaled to spectral norm ``scale``."""
    rng = _rng(cfg, rng)
    G = _ginibre(cfg.n, rng)
    H = hermitian_part(G)
    return cfg.scale * H / np.linalg.norm(H, 2)


def sector_margins(X, p: float) -> tuple[float, float]:
    """``(min eig Im X, min eig -Im(e^{-ip pi} X))``."""
    X = np.asarray(X, dtype=complex)
    im = (X - X.conj().T) / 2j
    Y = np.exp(-1j * p * np.pi) * X
    im2 = (Y - Y.conj().T) / 2j
    return psd_margin(im), psd_margin(-im2)


def rand_sector(cfg: SampleConfig, p: float, rng=None) -> np.ndarray:
    """A matrix in the sector cone ``{Im X > 0, Im(e^{-ip pi} X) < 0}``.

    Built as ``U diag(w e^{i theta}) U*`` with ``theta`` uniform in
    ``(0.05 p pi, 0.95 p pi)`` and ``w`` log-uniform in ``[margin, 1] scale``,
    plus a strictly upper-triangular (in the frame ``U``) perturbation;
    rejected and redrawn until both margins are positive.
    """
    if not 0 < p <= 1:
        raise ValidationError(f"p must be in (0, 1], got {p}")
    rng = _rng(cfg, rng)
    n = cfg.n
    for _ in range(SECTOR_TRIES):
        theta = rng.uniform(0.05 * p * np.pi, 0.95 * p * np.pi, n)
        w = cfg.scale * np.exp(rng.uniform(math.log(cfg.margin), 0.0, n))
        U = haar_unitary(n, rng)
        room = float(np.min(w * np.minimum(np.sin(theta), np.sin(p * np.pi - theta))))
        N = np.triu(_ginibre(n, rng), 1)
        norm = np.linalg.norm(N, 2)
        if norm > 0:
            N *= 0.2 * room / norm
        X = U @ (np.diag(w * np.exp(1j * theta)) + N) @ U.conj().T
        m1, m2 = sector_margins(X, p)
        if m1 > 0 and m2 > 0:
            return X
    raise SamplerError(f"rand_sector: no valid sample after {SECTOR_TRIES} tries (p={p})")
