"""Scalar function specifications with certified operator-class tags.

A :class:`FunctionSpec` pairs a domain interval with one *form*: a builtin
elementary function or one of the integral representations (with finitely
many atoms) that generate operator k-tone, monotone, monotone decreasing and
convex functions. Class tags are derived from the form and cannot be set by
hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import DomainError, SpecConstraintError

INF = math.inf
MAX_TONE = 16
ALL_TONES = frozenset(range(1, MAX_TONE + 1))
KTONE_LAMBDA_MARGIN = 1e-3
BUILTINS = ("id", "const", "pow", "log", "inv", "exp")


def tones_from(k0: int) -> frozenset:
    """Tones implied by operator ``k0``-tonicity: ``k0, k0 + 2, k0 + 4, ...``."""
    return frozenset(range(k0, MAX_TONE + 1, 2))


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a < self.b) or math.isnan(self.a) or math.isnan(self.b):
            raise SpecConstraintError(f"need a < b, got ({self.a}, {self.b})", "domain")

    @property
    def finite(self) -> bool:
        return math.isfinite(self.a) and math.isfinite(self.b)

    def contains(self, x, margin: float = 0.0):
        x = np.asarray(x, dtype=float)
        return (x > self.a + margin) & (x < self.b - margin)

    def gap(self, x):
        """Distance from real ``x`` to the nearest finite endpoint."""
        x = np.asarray(x, dtype=float)
        return np.minimum(x - self.a, self.b - x)

    def text(self) -> str:
        return f"({_num(self.a)},{_num(self.b)})"


MINUS_ONE_ONE = Interval(-1.0, 1.0)
POSITIVE = Interval(0.0, INF)


def _num(x: float) -> str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return repr(float(x))


# ------------------------------------------------------------------ forms


@dataclass(frozen=True)
class Builtin:
    name: str
    param: float | None = None


@dataclass(frozen=True)
class KTone:
    """``P(y) + sum_j w_j y^l / (1 - lam_j y)`` in the variable ``y`` on (-1, 1)."""

    l: int
    poly: tuple = ()
    atoms: tuple = ()


@dataclass(frozen=True)
class Monotone:
    """``alpha + beta x + sum_j w_j x / (x + lam_j)`` on (0, inf)."""

    alpha: float = 0.0
    beta: float = 0.0
    atoms: tuple = ()


@dataclass(frozen=True)
class Decreasing:
    """``alpha + beta x + sum_j w_j / (x + lam_j)`` on (0, inf)."""

    alpha: float = 0.0
    beta: float = 0.0
    atoms: tuple = ()


@dataclass(frozen=True)
class Convex:
    """``c0 + c1 (x-1) + gamma (x-1)^2 + sum_j w_j (x-1)^2 / (x + lam_j)`` on (0, inf)."""

    c0: float = 0.0
    c1: float = 0.0
    gamma: float = 0.0
    atoms: tuple = ()


@dataclass(frozen=True)
class Rescaled:
    """``base((x - shift) / scale)``: the affine pull-back of another spec."""

    base: "FunctionSpec"
    scale: float
    shift: float


@dataclass(frozen=True)
class ClassTags:
    tones: frozenset = frozenset()
    monotone: bool = False
    decreasing: bool = False
    convex: bool = False
    nonnegative: bool = False
    constant: bool = False
    notes: tuple = ()

    def has_tone(self, k: int) -> bool:
        return k in self.tones

    def to_json(self) -> dict:
        return {
            "tones": sorted(self.tones),
            "monotone": self.monotone,
            "decreasing": self.decreasing,
            "convex": self.convex,
            "nonnegative": self.nonnegative,
            "constant": self.constant,
            "notes": list(self.notes),
        }


# ------------------------------------------------------------------ the spec


@dataclass(frozen=True)
class FunctionSpec:
    domain: Interval
    form: object

    def __post_init__(self):
        _validate(self.domain, self.form)

    # affine map sending a finite ktone domain onto (-1, 1)
    @cached_property
    def _ktone_map(self) -> tuple[float, float]:
        a, b = self.domain.a, self.domain.b
        return 2.0 / (b - a), -(a + b) / (b - a)

    @cached_property
    def tags(self) -> ClassTags:
        return _derive_tags(self.domain, self.form)

    @property
    def kind(self) -> str:
        f = self.form
        return f.name if isinstance(f, Builtin) else type(f).__name__.lower()

    def is_polynomial(self) -> bool:
        f = self.form
        if isinstance(f, Builtin):
            return f.name in ("id", "const") or (f.name == "pow" and _nonneg_int(f.param))
        if isinstance(f, KTone):
            return all(lam == 0.0 or w == 0.0 for w, lam in f.atoms)
        if isinstance(f, Rescaled):
            return f.base.is_polynomial()
        return False

    @property
    def entire(self) -> bool:
        """True when the analytic continuation extends to all of C."""
        f = self.form
        if isinstance(f, Rescaled):
            return f.base.entire
        return self.is_polynomial() or (isinstance(f, Builtin) and f.name == "exp")

    def polynomial_degree(self) -> int | None:
        """Degree when the spec is a polynomial, else None."""
        if not self.is_polynomial():
            return None
        f = self.form
        if isinstance(f, Builtin):
            return {"id": 1, "const": 0}.get(f.name, int(f.param or 0))
        if isinstance(f, KTone):
            deg = len(f.poly) - 1
            if any(w != 0.0 for w, _ in f.atoms):
                deg = max(deg, f.l)
            return max(deg, 0)
        return f.base.polynomial_degree()

    # -------------------------------------------------------------- evaluation

    def evaluate(self, z):
        """Analytic continuation at ``z`` (vectorized, no domain check)."""
        z = np.asarray(z, dtype=complex)
        f = self.form
        with np.errstate(all="ignore"):
            if isinstance(f, Builtin):
                return _builtin_eval(f, z)
            if isinstance(f, KTone):
                s, t = self._ktone_map
                y = s * z + t
                out = np.polyval(list(reversed(f.poly)), y) if f.poly else np.zeros_like(y)
                for w, lam in f.atoms:
                    out = out + w * y**f.l / (1.0 - lam * y)
                return out
            if isinstance(f, Monotone):
                out = f.alpha + f.beta * z
                for w, lam in f.atoms:
                    out = out + w * z / (z + lam)
                return out
            if isinstance(f, Decreasing):
                out = f.alpha + f.beta * z
                for w, lam in f.atoms:
                    out = out + w / (z + lam)
                return out
            if isinstance(f, Convex):
                u = z - 1.0
                out = f.c0 + f.c1 * u + f.gamma * u * u
                for w, lam in f.atoms:
                    out = out + w * u * u / (z + lam)
                return out
            if isinstance(f, Rescaled):
                return f.base.evaluate((z - f.shift) / f.scale)
        raise TypeError(f"unknown form {f!r}")

    def in_region(self, z, margin: float = 0.0):
        """True where ``z`` lies in (C minus R) union (a, b)."""
        z = np.asarray(z, dtype=complex)
        off_axis = np.abs(z.imag) > margin
        return off_axis | self.domain.contains(z.real, margin)

    # -------------------------------------------------- divided differences

    def divided_differences(self, rows) -> np.ndarray:
        """Divided differences ``f[x_0, ..., x_m]`` for each row of ``rows``.

        ``rows`` has shape ``(T, m+1)`` of real nodes inside the domain;
        repeated nodes give confluent (derivative) values.
        """
        X = np.atleast_2d(np.asarray(rows, dtype=float))
        f = self.form
        if isinstance(f, Builtin):
            return _builtin_dd(f, self.domain, X)
        if isinstance(f, KTone):
            s, t = self._ktone_map
            m = X.shape[1] - 1
            Y = s * X + t
            out = _poly_dd(f.poly, Y)
            for w, lam in f.atoms:
                out = out + w * _ktone_atom_dd(f.l, lam, Y)
            return s**m * out
        if isinstance(f, Monotone):
            m = X.shape[1] - 1
            out = _poly_dd((f.alpha, f.beta), X)
            for w, lam in f.atoms:
                # x / (x + lam) = 1 - lam / (x + lam)
                out = out - w * lam * _shifted_inverse_dd(lam, X)
                if m == 0:
                    out = out + w
            return out
        if isinstance(f, Decreasing):
            out = _poly_dd((f.alpha, f.beta), X)
            for w, lam in f.atoms:
                out = out + w * _shifted_inverse_dd(lam, X)
            return out
        if isinstance(f, Convex):
            out = _poly_dd((f.c0 - f.c1 + f.gamma, f.c1 - 2 * f.gamma, f.gamma), X)
            for w, lam in f.atoms:
                out = out + w * _convex_atom_dd(lam, X)
            return out
        if isinstance(f, Rescaled):
            m = X.shape[1] - 1
            return f.scale ** (-m) * f.base.divided_differences((X - f.shift) / f.scale)
        raise TypeError(f"unknown form {f!r}")

    def derivative(self, x, order: int):
        """Real derivative of the given order at real ``x`` (vectorized)."""
        x = np.asarray(x, dtype=float)
        rows = np.repeat(x.reshape(-1, 1), order + 1, axis=1)
        return (math.factorial(order) * self.divided_differences(rows)).reshape(x.shape)

    # -------------------------------------------------------------- text

    def text(self) -> str:
        from .parse import format_spec

        return format_spec(self)

    def to_json(self) -> dict:
        from .parse import spec_to_json

        return spec_to_json(self)

    def __str__(self) -> str:
        return self.text()


def eval_scalar(f: FunctionSpec, z) -> complex:
    """Value of the analytic continuation of ``f`` at a single point ``z``.

    Raises :class:`DomainError` when ``z`` is real and outside the open domain.
    """
    z = complex(z)
    if z.imag == 0.0 and not f.domain.contains(z.real):
        raise DomainError(f"{z} is outside the analyticity region of {f.text()}", z)
    return complex(f.evaluate(z))


def affine_rescale(f: FunctionSpec, A, B):
    """Move a finite domain ``(a, b)`` onto ``(-1, 1)``.

    Returns ``(g, A2, B2)`` with ``g(x) = f((x - beta)/alpha)``,
    ``A2 = alpha A + beta I`` and ``B2 = alpha B``, so that
    ``D^m f(A; B) = D^m g(A2; B2)`` and ``f(A + iB) = g(A2 + iB2)``.
    """
    from ..matcore import as_hermitian, hermitian_eigen

    if not f.domain.finite:
        raise DomainError("affine rescaling needs a finite interval; shrink to a hull of the spectrum first")
    A = as_hermitian(A)
    B = as_hermitian(B)
    lam = hermitian_eigen(A).values
    if not np.all(f.domain.contains(lam)):
        raise DomainError(f"spectrum of A is not inside {f.domain.text()}", lam)
    a, b = f.domain.a, f.domain.b
    alpha = 2.0 / (b - a)
    beta = -(a + b) / (b - a)
    n = A.shape[0]
    if isinstance(f.form, KTone):
        g = FunctionSpec(MINUS_ONE_ONE, f.form)
    elif alpha == 1.0 and beta == 0.0:
        g = f
    else:
        g = FunctionSpec(MINUS_ONE_ONE, Rescaled(f, alpha, beta))
    return g, alpha * A + beta * np.eye(n), alpha * B


def shrink_to_hull(f: FunctionSpec, lam, pad: float = 0.5) -> FunctionSpec:
    """Restrict ``f`` to a finite sub-interval around the real points ``lam``."""
    lam = np.asarray(lam, dtype=float)
    lo, hi = float(lam.min()), float(lam.max())
    width = max(hi - lo, 1e-3)
    a = max(f.domain.a, lo - pad * width) if math.isfinite(f.domain.a) else lo - pad * width
    b = min(f.domain.b, hi + pad * width) if math.isfinite(f.domain.b) else hi + pad * width
    a = 0.5 * (a + lo) if a <= f.domain.a else a
    b = 0.5 * (b + hi) if b >= f.domain.b else b
    return FunctionSpec(Interval(a, b), f.form) if not isinstance(f.form, KTone) else f


# ------------------------------------------------------------------ validation


def _nonneg_int(p) -> bool:
    return p is not None and float(p).is_integer() and p >= 0


def _check_atoms(atoms, lam_ok, lam_desc):
    for i, atom in enumerate(atoms):
        if len(atom) != 2:
            raise SpecConstraintError("each atom is a (weight, lambda) pair", f"atoms[{i}]")
        w, lam = atom
        if not (math.isfinite(w) and math.isfinite(lam)):
            raise SpecConstraintError("non-finite value", f"atoms[{i}]")
        if w < 0:
            raise SpecConstraintError(f"weight {w} is negative", f"atoms[{i}].weight")
        if not lam_ok(lam):
            raise SpecConstraintError(f"lambda {lam} must be {lam_desc}", f"atoms[{i}].lambda")


def _nonneg(value, name):
    if not (math.isfinite(value) and value >= 0):
        raise SpecConstraintError(f"{value} must be a finite non-negative number", name)


def _validate(domain: Interval, form) -> None:
    if isinstance(form, Builtin):
        if form.name not in BUILTINS:
            raise SpecConstraintError(f"unknown builtin '{form.name}'", "name")
        if form.name in ("pow", "const"):
            if form.param is None or not math.isfinite(form.param):
                raise SpecConstraintError("needs a finite parameter", form.name)
        needs_positive = form.name in ("log", "inv") or (form.name == "pow" and not _nonneg_int(form.param))
        if needs_positive and domain.a < 0:
            raise SpecConstraintError(f"{form.name} is only real-analytic on subsets of (0, inf)", "domain")
    elif isinstance(form, KTone):
        if not (isinstance(form.l, int) and form.l >= 1):
            raise SpecConstraintError(f"tone order must be a positive integer, got {form.l}", "l")
        if len(form.poly) > form.l:
            raise SpecConstraintError(f"degree of P is {len(form.poly) - 1} but must be < l = {form.l}", "poly")
        if not all(math.isfinite(c) for c in form.poly):
            raise SpecConstraintError("non-finite coefficient", "poly")
        if not domain.finite:
            raise SpecConstraintError("ktone representations need a finite interval", "domain")
        _check_atoms(form.atoms, lambda x: -1.0 <= x <= 1.0, "in [-1, 1]")
    elif isinstance(form, (Monotone, Decreasing, Convex)):
        if domain != POSITIVE:
            raise SpecConstraintError("this representation lives on (0, inf)", "domain")
        if isinstance(form, Monotone):
            _nonneg(form.alpha, "alpha")
            _nonneg(form.beta, "beta")
            _check_atoms(form.atoms, lambda x: x > 0.0, "> 0")
        elif isinstance(form, Decreasing):
            _nonneg(form.alpha, "alpha")
            _nonneg(form.beta, "beta")
            _check_atoms(form.atoms, lambda x: x >= 0.0, ">= 0")
        else:
            if not (math.isfinite(form.c0) and math.isfinite(form.c1)):
                raise SpecConstraintError("coefficients must be finite", "alpha/beta")
            _nonneg(form.gamma, "gamma")
            _check_atoms(form.atoms, lambda x: x >= 0.0, ">= 0")
    elif isinstance(form, Rescaled):
        if not (form.scale > 0 and math.isfinite(form.shift)):
            raise SpecConstraintError("rescaling needs scale > 0", "scale")
    else:
        raise SpecConstraintError(f"unknown form {form!r}", "form")


# ------------------------------------------------------------------ tags


def _linear_tags(slope: float, intercept_nonneg: bool, constant: bool) -> ClassTags:
    tones = ALL_TONES if slope >= 0 else ALL_TONES - {1}
    return ClassTags(
        tones=tones,
        monotone=slope >= 0,
        decreasing=slope <= 0,
        convex=True,
        nonnegative=intercept_nonneg,
        constant=constant,
    )


def _derive_tags(domain: Interval, form) -> ClassTags:
    if isinstance(form, Builtin):
        return _builtin_tags(domain, form)
    if isinstance(form, KTone):
        active = [(w, lam) for w, lam in form.atoms if w > 0]
        notes = ()
        if any(abs(lam) > 1.0 - KTONE_LAMBDA_MARGIN for _, lam in active):
            notes = ("atom at |lambda| within 1e-3 of 1: resolvent conditioning not guaranteed",)
        if not active and len(form.poly) <= 1:
            c = form.poly[0] if form.poly else 0.0
            return _linear_tags(0.0, c >= 0, True)
        tones = tones_from(form.l)
        if not active:
            # polynomial of degree < l: every derivative of order >= l vanishes
            tones = frozenset(range(form.l, MAX_TONE + 1))
        return ClassTags(tones=tones, monotone=1 in tones, convex=2 in tones, notes=notes)
    if isinstance(form, Monotone):
        active = [a for a in form.atoms if a[0] > 0]
        if not active:
            return _linear_tags(form.beta, form.alpha >= 0, form.beta == 0)
        return ClassTags(tones=tones_from(1), monotone=True, nonnegative=True)
    if isinstance(form, Decreasing):
        active = [a for a in form.atoms if a[0] > 0]
        if not active:
            return _linear_tags(form.beta, form.alpha >= 0, form.beta == 0)
        return ClassTags(tones=tones_from(2), convex=True, decreasing=form.beta == 0, nonnegative=True)
    if isinstance(form, Convex):
        active = [a for a in form.atoms if a[0] > 0]
        if not active and form.gamma == 0:
            return _linear_tags(form.c1, False, form.c1 == 0)
        return ClassTags(tones=tones_from(2), convex=True)
    if isinstance(form, Rescaled):
        t = form.base.tags
        return ClassTags(t.tones, t.monotone, t.decreasing, t.convex, t.nonnegative, t.constant, t.notes)
    raise TypeError(form)


def _builtin_tags(domain: Interval, form: Builtin) -> ClassTags:
    name, p = form.name, form.param
    if name == "id":
        return _linear_tags(1.0, domain.a >= 0, False)
    if name == "const":
        return _linear_tags(0.0, p >= 0, True)
    if name == "log":
        return ClassTags(tones=tones_from(1), monotone=True)
    if name == "inv":
        return ClassTags(tones=tones_from(2), convex=True, decreasing=True, nonnegative=True)
    if name == "exp":
        return ClassTags()
    # pow
    if p == 0:
        return _linear_tags(0.0, True, True)
    if p == 1:
        return _linear_tags(1.0, True, False)
    if _nonneg_int(p):
        # D^p x^p = p! B^p >= 0 and all higher derivatives vanish
        return ClassTags(tones=frozenset(range(int(p), MAX_TONE + 1)), convex=p == 2, nonnegative=domain.a >= 0)
    if 0 < p < 1:
        return ClassTags(tones=tones_from(1), monotone=True, nonnegative=True)
    if 1 < p <= 2:
        return ClassTags(tones=tones_from(2), convex=True, nonnegative=True)
    if -1 <= p < 0:
        return ClassTags(tones=tones_from(2), convex=True, decreasing=True, nonnegative=True)
    return ClassTags(nonnegative=True)


# ------------------------------------------------------------------ builtins


def _builtin_eval(f: Builtin, z):
    name = f.name
    if name == "id":
        return z
    if name == "const":
        return np.full_like(z, f.param)
    if name == "log":
        return np.log(z)
    if name == "inv":
        return 1.0 / z
    if name == "exp":
        return np.exp(z)
    if _nonneg_int(f.param):
        return z ** int(f.param)
    return np.power(z, f.param)


def _builtin_derivative(f: Builtin, x, j: int):
    """Closed-form ``j``-th derivative for the builtins without exact divided differences."""
    name = f.name
    if name == "exp":
        return np.exp(x)
    if name == "log":
        if j == 0:
            return np.log(x)
        return (-1.0) ** (j - 1) * math.factorial(j - 1) * x ** (-float(j))
    if name == "pow":
        p = f.param
        coef = 1.0
        for i in range(j):
            coef *= p - i
        return coef * np.power(x, p - j)
    raise TypeError(name)


def _builtin_dd(f: Builtin, domain: Interval, X):
    m = X.shape[1] - 1
    name = f.name
    if name == "id":
        return _poly_dd((0.0, 1.0), X)
    if name == "const":
        return _poly_dd((f.param,), X)
    if name == "inv":
        return _shifted_inverse_dd(0.0, X)
    if name == "pow" and _nonneg_int(f.param):
        coeffs = [0.0] * int(f.param) + [1.0]
        return _poly_dd(coeffs, X)
    singular = 0.0 if name in ("log", "pow") else None
    return _generic_dd(lambda x, j: _builtin_derivative(f, x, j), X, singular, m)


# ------------------------------------------------------------------ divided differences


def complete_homogeneous(Y, max_degree: int):
    """``h_d`` of the row variables for ``d = 0..max_degree``; shape ``(max_degree+1, T)``."""
    T = Y.shape[0]
    H = np.zeros((max_degree + 1, T))
    H[0] = 1.0
    for col in range(Y.shape[1]):
        y = Y[:, col]
        for d in range(1, max_degree + 1):
            H[d] = H[d] + y * H[d - 1]
    return H


def _poly_dd(coeffs, X):
    m = X.shape[1] - 1
    deg = len(coeffs) - 1
    if deg < m:
        return np.zeros(X.shape[0])
    H = complete_homogeneous(X, deg - m)
    out = np.zeros(X.shape[0])
    for l in range(m, deg + 1):
        out = out + coeffs[l] * H[l - m]
    return out


def _resolvent_dd(lam, Y, start: int = 0):
    """``g[y_start..y_m]`` for ``g(y) = 1/(1 - lam y)``."""
    m = Y.shape[1] - 1
    return lam ** (m - start) / np.prod(1.0 - lam * Y[:, start:], axis=1)


def _ktone_atom_dd(l, lam, Y):
    """``y^l / (1 - lam y)`` via the Leibniz rule for divided differences."""
    m = Y.shape[1] - 1
    out = np.zeros(Y.shape[0])
    for r in range(0, min(m, l) + 1):
        h = complete_homogeneous(Y[:, : r + 1], l - r)[l - r]
        out = out + h * _resolvent_dd(lam, Y, r)
    return out


def _shifted_inverse_dd(lam, X, start: int = 0):
    """``g[x_start..x_m]`` for ``g(x) = 1/(x + lam)``."""
    m = X.shape[1] - 1
    return (-1.0) ** (m - start) / np.prod(X[:, start:] + lam, axis=1)


def _convex_atom_dd(lam, X):
    """``(x-1)^2 / (x + lam)`` via the Leibniz rule."""
    m = X.shape[1] - 1
    u = X - 1.0
    parts = [u[:, 0] ** 2]
    if m >= 1:
        parts.append(u[:, 0] + u[:, 1])
    if m >= 2:
        parts.append(np.ones(X.shape[0]))
    out = np.zeros(X.shape[0])
    for r, p in enumerate(parts):
        out = out + p * _shifted_inverse_dd(lam, X, r)
    return out


TAYLOR_TERMS = 60
TAYLOR_RATIO = 0.5
TAYLOR_MAX_SPREAD = 8.0


def _generic_dd(deriv, X, singular, m):
    """Divided differences from derivatives.

    A sub-row whose spread is at most half the distance from its centre to
    the singularity (or at most 8 for entire functions) is evaluated by the
    Taylor expansion ``sum_k f^(k)(c)/k! h_(k-j)(x - c)``; wider sub-rows use
    the Newton recursion on sorted nodes, which is stable at that spacing.
    """
    X = np.sort(X, axis=1)
    T = X.shape[0]
    table = [deriv(X[:, i], 0) for i in range(m + 1)]
    for j in range(1, m + 1):
        nxt = []
        for i in range(m + 1 - j):
            lo, hi = X[:, i], X[:, i + j]
            spread = hi - lo
            centre = 0.5 * (lo + hi)
            if singular is None:
                near = spread <= TAYLOR_MAX_SPREAD
            else:
                near = spread <= TAYLOR_RATIO * (centre - singular)
            with np.errstate(all="ignore"):
                val = (table[i + 1] - table[i]) / spread
            if np.any(near):
                val = np.array(val, copy=True)
                val[near] = _taylor_dd(deriv, X[near, i : i + j + 1])
            nxt.append(val)
        table = nxt
    return table[0] if m > 0 else table[0].reshape(T)


def _taylor_dd(deriv, sub):
    j = sub.shape[1] - 1
    c = 0.5 * (sub[:, 0] + sub[:, -1])
    H = complete_homogeneous(sub - c[:, None], TAYLOR_TERMS)
    out = np.zeros(sub.shape[0])
    for k in range(j, j + TAYLOR_TERMS + 1):
        out = out + deriv(c, k) / math.factorial(k) * H[k - j]
    return out
