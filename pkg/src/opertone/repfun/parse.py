"""Text and JSON forms of :class:`FunctionSpec`.

Grammar (one line, whitespace separated)::

    spec     := builtin | rep
    builtin  := ("id" | "log" | "inv" | "exp" | "pow" REAL | "const" REAL) "on" interval
    rep      := ("ktone" INT | "monotone" | "decreasing" | "convex") ["on" interval]
                ["alpha" REAL] ["beta" REAL] ["gamma" REAL]
                ["poly" "[" REAL ("," REAL)* "]"] "atoms" "[" [pair ("," pair)*] "]"
    pair     := "(" REAL "," REAL ")"
    interval := "(" (REAL | "-inf") "," (REAL | "inf") ")"

For ``convex``, ``alpha`` and ``beta`` are the constant and linear
coefficients ``c0`` and ``c1``.
"""

from __future__ import annotations

import math
import re

from ..errors import SpecConstraintError, SpecSyntaxError
from .spec import (
    INF,
    MINUS_ONE_ONE,
    POSITIVE,
    Builtin,
    Convex,
    Decreasing,
    FunctionSpec,
    Interval,
    KTone,
    Monotone,
    Rescaled,
    _num,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>[-+]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?))
  | (?P<word>[A-Za-z_]+)
  | (?P<punct>[()\[\],])
    """,
    re.VERBOSE,
)

_REP_KEYWORDS = ("alpha", "beta", "gamma", "poly")


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.kind}:{self.text!r}@{self.line}:{self.col}"


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SpecSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rindex("\n") + 1
        else:
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg, tok=None):
        tok = tok or self.cur
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise SpecSyntaxError(f"{msg}, found {found}", tok.line, tok.col)

    def take(self, text):
        if self.cur.text != text:
            self.fail(f"expected {text!r}")
        self.i += 1

    def accept(self, text) -> bool:
        if self.cur.text == text:
            self.i += 1
            return True
        return False

    def real(self) -> float:
        tok = self.cur
        if tok.kind != "num":
            self.fail("expected a number")
        self.i += 1
        return float(tok.text)

    def integer(self) -> int:
        tok = self.cur
        if tok.kind != "num" or not re.fullmatch(r"[-+]?\d+", tok.text):
            self.fail("expected an integer")
        self.i += 1
        return int(tok.text)

    def interval(self) -> Interval:
        self.take("(")
        a = self.real()
        self.take(",")
        b = self.real()
        self.take(")")
        if a == INF or b == -INF:
            raise SpecConstraintError(f"bad interval ({a}, {b})", "domain")
        return Interval(a, b)

    def reals(self) -> tuple:
        self.take("[")
        out = []
        if self.cur.text != "]":
            out.append(self.real())
            while self.accept(","):
                out.append(self.real())
        self.take("]")
        return tuple(out)

    def pairs(self) -> tuple:
        self.take("[")
        out = []
        if self.cur.text != "]":
            out.append(self.pair())
            while self.accept(","):
                out.append(self.pair())
        self.take("]")
        return tuple(out)

    def pair(self):
        self.take("(")
        w = self.real()
        self.take(",")
        lam = self.real()
        self.take(")")
        return (w, lam)

    def parse(self) -> FunctionSpec:
        tok = self.cur
        if tok.kind != "word":
            self.fail("expected a function name")
        name = tok.text
        self.i += 1
        if name in ("id", "log", "inv", "exp", "pow", "const"):
            param = self.real() if name in ("pow", "const") else None
            self.take("on")
            domain = self.interval()
            spec = FunctionSpec(domain, Builtin(name, param))
        elif name in ("ktone", "monotone", "decreasing", "convex"):
            spec = self.rep(name)
        else:
            self.fail("expected a builtin or representation name", tok)
        if self.cur.kind != "eof":
            self.fail("unexpected trailing input")
        return spec

    def rep(self, name) -> FunctionSpec:
        l = self.integer() if name == "ktone" else None
        if l is not None and l < 1:
            raise SpecConstraintError(f"tone order must be >= 1, got {l}", "l")
        domain = MINUS_ONE_ONE if name == "ktone" else POSITIVE
        if self.accept("on"):
            domain = self.interval()
        seen: dict[str, object] = {}
        while self.cur.text in _REP_KEYWORDS:
            key = self.cur.text
            if key in seen:
                self.fail(f"duplicate {key!r}")
            self.i += 1
            if key == "poly":
                if name != "ktone":
                    self.fail("'poly' only applies to ktone", self.toks[self.i - 1])
                poly = self.reals()
                if len(poly) > l:
                    raise SpecConstraintError(
                        f"degree of P is {len(poly) - 1} but must be < l = {l}", "poly"
                    )
                seen[key] = poly
            else:
                if name == "ktone" or (key == "gamma" and name != "convex"):
                    self.fail(f"{key!r} does not apply to {name}", self.toks[self.i - 1])
                seen[key] = self.real()
        self.take("atoms")
        atoms = self.pairs()
        if name == "ktone":
            form = KTone(l, seen.get("poly", ()), atoms)
        elif name == "monotone":
            form = Monotone(seen.get("alpha", 0.0), seen.get("beta", 0.0), atoms)
        elif name == "decreasing":
            form = Decreasing(seen.get("alpha", 0.0), seen.get("beta", 0.0), atoms)
        else:
            form = Convex(seen.get("alpha", 0.0), seen.get("beta", 0.0), seen.get("gamma", 0.0), atoms)
        return FunctionSpec(domain, form)


def parse_spec(text: str) -> FunctionSpec:
    """Parse one spec line; raises SpecSyntaxError / SpecConstraintError."""
    return _Parser(text).parse()


def _atoms_text(atoms) -> str:
    return "[" + ",".join(f"({_num(w)},{_num(lam)})" for w, lam in atoms) + "]"


def format_spec(spec: FunctionSpec) -> str:
    f = spec.form
    on = f"on {spec.domain.text()}"
    if isinstance(f, Builtin):
        head = f.name if f.param is None else f"{f.name} {_num(f.param)}"
        return f"{head} {on}"
    if isinstance(f, KTone):
        poly = f" poly [{','.join(_num(c) for c in f.poly)}]" if f.poly else ""
        return f"ktone {f.l} {on}{poly} atoms {_atoms_text(f.atoms)}"
    if isinstance(f, (Monotone, Decreasing)):
        name = "monotone" if isinstance(f, Monotone) else "decreasing"
        return f"{name} {on} alpha {_num(f.alpha)} beta {_num(f.beta)} atoms {_atoms_text(f.atoms)}"
    if isinstance(f, Convex):
        return (
            f"convex {on} alpha {_num(f.c0)} beta {_num(f.c1)} gamma {_num(f.gamma)} "
            f"atoms {_atoms_text(f.atoms)}"
        )
    if isinstance(f, Rescaled):
        # internal form only; not part of the input grammar
        return f"rescale {_num(f.scale)} {_num(f.shift)} of [{format_spec(f.base)}]"
    raise TypeError(f)


# ------------------------------------------------------------------ JSON


def _jnum(x: float):
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return float(x)


def _fnum(x) -> float:
    if isinstance(x, str):
        return float(x)
    return float(x)


def spec_to_json(spec: FunctionSpec) -> dict:
    f = spec.form
    out = {"domain": [_jnum(spec.domain.a), _jnum(spec.domain.b)]}
    if isinstance(f, Builtin):
        out.update(kind="builtin", name=f.name)
        if f.param is not None:
            out["param"] = f.param
    elif isinstance(f, KTone):
        out.update(kind="ktone", l=f.l, poly=list(f.poly), atoms=[list(a) for a in f.atoms])
    elif isinstance(f, (Monotone, Decreasing)):
        out.update(
            kind="monotone" if isinstance(f, Monotone) else "decreasing",
            alpha=f.alpha,
            beta=f.beta,
            atoms=[list(a) for a in f.atoms],
        )
    elif isinstance(f, Convex):
        out.update(kind="convex", c0=f.c0, c1=f.c1, gamma=f.gamma, atoms=[list(a) for a in f.atoms])
    elif isinstance(f, Rescaled):
        out.update(kind="rescaled", scale=f.scale, shift=f.shift, base=spec_to_json(f.base))
    return out


def spec_from_json(obj: dict) -> FunctionSpec:
    try:
        a, b = (_fnum(v) for v in obj["domain"])
        kind = obj["kind"]
        atoms = tuple((float(w), float(lam)) for w, lam in obj.get("atoms", ()))
        if kind == "builtin":
            param = obj.get("param")
            form = Builtin(obj["name"], None if param is None else float(param))
        elif kind == "ktone":
            form = KTone(int(obj["l"]), tuple(float(c) for c in obj.get("poly", ())), atoms)
        elif kind == "monotone":
            form = Monotone(float(obj.get("alpha", 0.0)), float(obj.get("beta", 0.0)), atoms)
        elif kind == "decreasing":
            form = Decreasing(float(obj.get("alpha", 0.0)), float(obj.get("beta", 0.0)), atoms)
        elif kind == "convex":
            form = Convex(float(obj.get("c0", 0.0)), float(obj.get("c1", 0.0)), float(obj.get("gamma", 0.0)), atoms)
        elif kind == "rescaled":
            form = Rescaled(spec_from_json(obj["base"]), float(obj["scale"]), float(obj["shift"]))
        else:
            raise SpecConstraintError(f"unknown kind {kind!r}", "kind")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecConstraintError):
            raise
        raise SpecConstraintError(f"malformed spec JSON: {exc}", "json") from exc
    if math.isnan(a) or math.isnan(b):
        raise SpecConstraintError("NaN endpoint", "domain")
    return FunctionSpec(Interval(a, b), form)
