"""Branch bookkeeping for the k mod 4 characterization of k-tone functions.

Writing ``k = 4k' - 2, 4k', 4k' - 3, 4k' - 1`` picks one of four inequalities
between a part of ``f(A + iB)`` and an alternating Taylor partial sum:

====  ========  ==========================  ==================
name  k mod 4   inequality                  partial sum index
====  ========  ==========================  ==================
B1    2         ``Re f(A+iB) <= even[K]``   ``K = 2k' - 2``
B2    0         ``Re f(A+iB) >= even[K]``   ``K = 2k' - 1``
B3    1         ``Im f(A+iB) >= odd[K]``    ``K = 2k' - 2``
B4    3         ``Im f(A+iB) <= odd[K]``    ``K = 2k' - 1``
====  ========  ==========================  ==================

In every branch the highest derivative that enters is ``D^(k-2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ValidationError

_TABLE = {
    # k mod 4: (name, part, sense, k' from k, K from k')
    2: ("B1", "re", "le", lambda k: (k + 2) // 4, lambda kp: 2 * kp - 2),
    0: ("B2", "re", "ge", lambda k: k // 4, lambda kp: 2 * kp - 1),
    1: ("B3", "im", "ge", lambda k: (k + 3) // 4, lambda kp: 2 * kp - 2),
    3: ("B4", "im", "le", lambda k: (k + 1) // 4, lambda kp: 2 * kp - 1),
}


@dataclass(frozen=True)
class ToneBranch:
    """The branch of the characterization attached to ``k``.

    ``part`` is ``re`` or ``im``; ``sense`` is ``le`` when the part of
    ``f(A+iB)`` is bounded above by the partial sum and ``ge`` when bounded
    below. ``truncation`` indexes ``TaylorSums.even`` / ``TaylorSums.odd``.
    """

    k: int

    def __post_init__(self):
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValidationError(f"k must be a positive integer, got {self.k!r}")

    @property
    def _row(self):
        return _TABLE[self.k % 4]

    @property
    def branch(self) -> str:
        return self._row[0]

    @property
    def part(self) -> str:
        return self._row[1]

    @property
    def sense(self) -> str:
        return self._row[2]

    @property
    def kprime(self) -> int:
        return self._row[3](self.k)

    @property
    def truncation(self) -> int:
        return self._row[4](self.kprime)

    @property
    def max_order(self) -> int:
        """Highest derivative order in the partial sum (0 when none enters)."""
        if self.part == "re":
            return 2 * self.truncation
        return max(2 * self.truncation - 1, 0)

    @property
    def needs_psd_b(self) -> bool:
        """Im branches quantify over ``B >= 0`` only."""
        return self.part == "im"

    def partial_sum(self, sums):
        """Select the branch's partial sum from a ``TaylorSums``."""
        seq = sums.even if self.part == "re" else sums.odd
        return seq[self.truncation]

    def describe(self) -> str:
        lhs = "Re" if self.part == "re" else "Im"
        rel = "<=" if self.sense == "le" else ">="
        seq = "even" if self.part == "re" else "odd"
        return f"{self.branch}: {lhs} f(A+iB) {rel} {seq}[{self.truncation}] (k={self.k}, k'={self.kprime})"


@dataclass(frozen=True)
class SectorParams:
    """Opening ``p pi`` of the sector cones ``V_{+-p pi}``."""

    p: float

    def __post_init__(self):
        if not 0.0 < float(self.p) <= 1.0:
            raise ValidationError(f"sector parameter p must be in (0, 1], got {self.p}")
