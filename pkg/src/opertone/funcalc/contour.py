"""Quadrature contours for the Cauchy integral and the trapezoid driver.

Three shapes are used.

``circles``
    A union of disjoint-interior circles, one per cluster of eigenvalues,
    each inside the analyticity region and enclosing only its own cluster.
    The Cauchy integral over the union equals the integral over any single
    curve enclosing the whole spectrum. Eigenvalues closer than half their
    distance to the excluded set are clustered together so that no tiny
    circle isolates part of a nearly defective group.

``circle``
    ``zeta = c + r e^{i theta}``; used in the upper half-plane when a circle
    with the required clearance fits, and for functions analytic on all of C.

``ellipse``
    An ellipse in a conformal chart ``w = phi(zeta)`` that maps the
    analyticity region onto a horizontal band. For ``(a, b)`` finite the
    region ``C \\ (R \\ (a, b))`` maps to ``|Im w| < pi`` through
    ``phi(zeta) = log((zeta - a)/(b - zeta))``; half-lines use a plain log
    and the upper half-plane uses ``log(zeta - c)`` onto ``0 < Im w < pi``.
    The periodic trapezoid rule in the ellipse angle then converges
    geometrically, with a rate set by the distance of the eigenvalue images
    to the band edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AccuracyError, GeometryError
from ..matcore import EPS

START_NODES = 64
MAX_NODES = 8192
ENDPOINT_CLEARANCE = 1e-9
RESOLVENT_CHECK = 1e-10
# eps times the integrand L1 bound may not exceed this fraction of the result
CANCELLATION_LIMIT = 1e-9


@dataclass(frozen=True)
class Contour:
    """A closed, positively oriented quadrature path.

    ``kind`` is ``circle``, ``circles`` or ``ellipse``. For ``circles`` the
    pairs ``(center, radius)`` are in ``circles``. For an ellipse, ``chart`` names
    the conformal map and ``center``, ``semi_axes`` are in chart
    coordinates; ``anchor`` holds the chart's real parameters.
    """

    kind: str
    center: complex
    radius: float = 0.0
    semi_axes: tuple = (0.0, 0.0)
    chart: str = "identity"
    anchor: tuple = ()
    circles: tuple = ()

    def _psi(self, w):
        """Chart inverse ``zeta = psi(w)`` and its derivative."""
        c = self.chart
        if c == "identity":
            return w, np.ones_like(w)
        if c == "interval":
            a, b = self.anchor
            # logistic function, branch chosen to avoid overflow and cancellation
            pos = w.real >= 0
            e = np.exp(np.where(pos, -w, w))
            s = np.where(pos, 1.0 / (1.0 + e), e / (1.0 + e))
            return a + (b - a) * s, (b - a) * s * (1.0 - s)
        if c == "right":
            (a,) = self.anchor
            e = np.exp(w)
            return a + e, e
        if c == "left":
            (b,) = self.anchor
            e = np.exp(-w)
            return b - e, e
        if c == "upper":
            (c0,) = self.anchor
            e = np.exp(w)
            return c0 + e, e
        raise ValueError(c)

    def nodes(self, N: int, odd_only: bool = False):
        """Nodes ``zeta_j`` and weights ``w_j`` (including ``1/(2 pi i)``)."""
        j = np.arange(1, N, 2) if odd_only else np.arange(N)
        theta = 2.0 * np.pi * j / N
        if self.kind == "circle":
            e = np.exp(1j * theta)
            return self.center + self.radius * e, self.radius * e / N
        if self.kind == "circles":
            e = np.exp(1j * theta)
            zeta = np.concatenate([c + r * e for c, r in self.circles])
            w = np.concatenate([r * e / N for c, r in self.circles])
            return zeta, w
        ax, by = self.semi_axes
        w = self.center.real + ax * np.cos(theta) + 1j * (self.center.imag + by * np.sin(theta))
        dw = -ax * np.sin(theta) + 1j * by * np.cos(theta)
        zeta, dpsi = self._psi(w)
        return zeta, dpsi * dw / (1j * N)

    def to_json(self, node_count: int | None = None) -> dict:
        out = {
            "kind": self.kind,
            "center": [float(self.center.real), float(self.center.imag)],
            "radius": float(self.radius),
        }
        if self.kind == "circles":
            out["circles"] = [[float(c.real), float(c.imag), float(r)] for c, r in self.circles]
        if self.kind == "ellipse":
            out["semi_axes"] = [float(v) for v in self.semi_axes]
            out["chart"] = self.chart
            out["anchor"] = [float(v) for v in self.anchor]
        if node_count is not None:
            out["nodes"] = int(node_count)
        return out


def _chart_for(a: float, b: float):
    """Chart name, anchor and forward map for the region C minus (R minus (a, b))."""
    if math.isfinite(a) and math.isfinite(b):
        return "interval", (a, b), lambda z: np.log((z - a) / (b - z))
    if math.isfinite(a):
        return "right", (a,), lambda z: np.log(z - a)
    if math.isfinite(b):
        return "left", (b,), lambda z: -np.log(b - z)
    return "identity", (), None


def _ellipse(images, y0: float, half_band: float, chart: str, anchor: tuple) -> Contour:
    x = images.real
    dy = float(np.max(np.abs(images.imag - y0)))
    gap = half_band - dy
    if gap <= 0:
        raise GeometryError("eigenvalue images touch the edge of the analyticity band")
    hx = 0.5 * float(x.max() - x.min())
    x0 = 0.5 * float(x.max() + x.min())
    by = dy + 0.5 * gap
    px, py = hx + 0.25 * gap, dy + 0.25 * gap
    ax = px / math.sqrt(1.0 - (py / by) ** 2)
    return Contour("ellipse", complex(x0, y0), 0.0, (ax, by), chart, anchor)


def _check_clearance(lam, a, b):
    for v in lam:
        for end in (a, b):
            if math.isfinite(end) and abs(v - end) < ENDPOINT_CLEARANCE:
                raise GeometryError(f"eigenvalue {v} lies within 1e-9 of the domain endpoint {end}")
        if abs(v.imag) < ENDPOINT_CLEARANCE and not (a < v.real < b):
            raise GeometryError(f"eigenvalue {v} lies on the excluded part of the real axis")


def _excluded_distance(z, a: float, b: float):
    """Distance from ``z`` to ``R \\ (a, b)``."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, np.abs(z.imag)
    inside = (x > a) & (x < b)
    edge = np.minimum(np.abs(x - a), np.abs(x - b))
    return np.where(inside, np.hypot(edge, y), y)


CLUSTER_RATIO = 0.5


def circle_cover(lam, a: float, b: float) -> Contour | None:
    """One circle per eigenvalue cluster, or None if some cluster cannot be
    enclosed by a circle inside the region."""
    lam = np.asarray(lam, dtype=complex)
    k = len(lam)
    room = _excluded_distance(lam, a, b)
    # single-linkage clustering on |lam_i - lam_j| < ratio * min(room_i, room_j)
    label = list(range(k))

    def root(i):
        while label[i] != i:
            label[i] = label[label[i]]
            i = label[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if abs(lam[i] - lam[j]) < CLUSTER_RATIO * min(room[i], room[j]):
                label[root(i)] = root(j)
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(root(i), []).append(i)
    circles = []
    for members in groups.values():
        pts = lam[members]
        c = complex(pts.mean())
        d = float(np.max(np.abs(pts - c)))
        others = np.delete(lam, members)
        outer = float(_excluded_distance(c, a, b))
        if others.size:
            outer = min(outer, float(np.min(np.abs(others - c))))
        if not d < 0.9 * outer:
            return None
        r = max(math.sqrt(d * outer), 0.5 * outer)
        circles.append((c, r))
    circles.sort(key=lambda cr: (cr[0].real, cr[0].imag))
    return Contour("circles", circles[0][0], circles[0][1], circles=tuple(circles))


def strip_contour(lam, a: float, b: float) -> Contour:
    """Contour around eigenvalues ``lam`` avoiding ``R \\ (a, b)``."""
    lam = np.asarray(lam, dtype=complex)
    chart, anchor, phi = _chart_for(a, b)
    if phi is None:
        c = complex(lam.mean())
        d = float(np.max(np.abs(lam - c)))
        return Contour("circle", c, max(1.25 * d, d + 1.0))
    _check_clearance(lam, a, b)
    cover = circle_cover(lam, a, b)
    if cover is not None:
        return cover
    return _ellipse(phi(lam), 0.0, math.pi, chart, anchor)


def upper_contour(lam, a: float = 0.0, b: float = 0.0) -> Contour:
    """Contour around eigenvalues in the open upper half-plane.

    A single circle inside the half-plane is preferred; otherwise the
    circle cover for the region ``C \\ (R \\ (a, b))``, and as a last resort
    an ellipse in the logarithmic chart of the half-plane.
    """
    lam = np.asarray(lam, dtype=complex)
    min_im = float(lam.imag.min())
    if min_im <= ENDPOINT_CLEARANCE:
        raise GeometryError(f"eigenvalue with imaginary part {min_im:.3e} is not in the upper half-plane")
    c = complex(lam.mean())
    d = float(np.max(np.abs(lam - c)))
    r = max(1.25 * d, d + 0.5 * min_im)
    if c.imag - r >= 0.5 * min_im * (1.0 - 1e-12):
        return Contour("circle", c, r)
    cover = circle_cover(lam, a, b) if a < b else None
    if cover is not None:
        return cover
    c0 = float(lam.real.mean())
    images = np.log(lam - c0)
    return _ellipse(images, 0.5 * math.pi, 0.5 * math.pi, "upper", (c0,))


@dataclass
class QuadratureResult:
    value: np.ndarray
    nodes_used: int
    est_error: float
    history: list


def integrate(contour: Contour, X, kernel, tol: float, check_resolvent: bool = True) -> QuadratureResult:
    """Trapezoid rule for ``sum_j w_j kernel(zeta_j, R_j)`` with node doubling.

    ``kernel(zeta, R)`` receives the node array and the stacked resolvents
    ``R_j = (zeta_j I - X)^{-1}`` and returns the stacked integrand matrices.
    Doubling reuses the previous nodes; it stops once the Cauchy difference
    between consecutive levels drops below
    ``tol |result| + 1e3 eps (sum_j |w_j| |g_j|)``.
    """
    X = np.asarray(X, dtype=complex)
    n = X.shape[0]
    eye = np.eye(n)

    def level(N, odd_only):
        zeta, w = contour.nodes(N, odd_only)
        M = zeta[:, None, None] * eye - X
        R = np.linalg.inv(M)
        if check_resolvent:
            res = np.max(np.linalg.norm(M @ R - eye, axis=(1, 2)))
            if not res <= RESOLVENT_CHECK * max(1.0, np.sqrt(n)):
                raise AccuracyError(f"resolvent residual {res:.3e} at a quadrature node", res)
        g = kernel(zeta, R)
        if not np.all(np.isfinite(g)):
            raise AccuracyError("non-finite integrand at a quadrature node")
        part = np.tensordot(w, g, axes=(0, 0))
        bound = float(np.sum(np.abs(w) * np.linalg.norm(g, axis=(1, 2))))
        return part, bound

    N = START_NODES
    per_level = len(contour.nodes(1)[0])
    total, bound = level(N, False)
    history = []
    while True:
        if N >= MAX_NODES:
            diff = history[-1] if history else math.inf
            raise AccuracyError(f"contour quadrature did not converge with {N} nodes (Cauchy difference {diff:.3e})", diff)
        odd, odd_bound = level(2 * N, True)
        new = 0.5 * total + odd
        bound = 0.5 * bound + odd_bound
        diff = float(np.linalg.norm(new - total))
        history.append(diff)
        total, N = new, 2 * N
        if diff <= tol * np.linalg.norm(total) + 1e3 * EPS * bound:
            if EPS * bound > CANCELLATION_LIMIT * (1.0 + np.linalg.norm(total)):
                raise AccuracyError(
                    f"quadrature sum lost accuracy to cancellation (integrand bound {bound:.3e})", diff
                )
            return QuadratureResult(total, N * per_level, diff, history)
