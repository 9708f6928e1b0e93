"""Result containers for directional derivatives and their Taylor partial sums."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matcore import matrix_to_json

ENGINES = ("contour", "divided_diff", "finite_diff", "closed_form")


@dataclass(frozen=True)
class DerivativeTensor:
    """``D^m f(A; B)`` with provenance."""

    order: int
    value: np.ndarray
    engine: str
    est_error: float = 0.0
    hermitian: bool = True
    flags: tuple = ()

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "engine": self.engine,
            "est_error": self.est_error,
            "hermitian": self.hermitian,
            "flags": list(self.flags),
            "value": matrix_to_json(self.value),
        }


@dataclass(frozen=True)
class TaylorSums:
    """Alternating partial sums built from one engine's derivatives.

    ``even[K] = sum_{m<=K} (-1)^m / (2m)! D^{2m}`` and
    ``odd[K] = sum_{1<=m<=K} (-1)^(m-1) / (2m-1)! D^{2m-1}`` (``odd[0] = 0``).
    """

    even: list
    odd: list
    engine: str
    derivatives: list = field(default_factory=list)
