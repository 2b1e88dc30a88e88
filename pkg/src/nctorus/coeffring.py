"""Exact commutative coefficients: Gaussian-rational Laurent polynomials.

The indeterminates are tau1, tau2 (Laurent), xi1, xi2 and r.  Monomials are
exponent tuples stored in the ordering order ``(x1, x2, r, t1, t2)``; the text
form prints them as ``t1^a*t2^b*x1^c*x2^d*r^e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import mpmath

# position of each indeterminate inside an exponent tuple
X1, X2, RV, T1, T2 = range(5)
NVARS = 5
VAR_NAMES = ("x1", "x2", "r", "t1", "t2")
PRINT_ORDER = (T1, T2, X1, X2, RV)

Mono = tuple  # tuple[int, int, int, int, int]
ONE_MONO: Mono = (0, 0, 0, 0, 0)


class MissingAssignment(KeyError):
    pass


class DivisionByZero(ZeroDivisionError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, slots=True)
class GaussRat:
    """Exact complex rational ``re + i*im``."""

    re: Fraction
    im: Fraction = Fraction(0)

    @staticmethod
    def of(x) -> "GaussRat":
        if isinstance(x, GaussRat):
            return x
        if isinstance(x, complex):
            return GaussRat(Fraction(x.real), Fraction(x.imag))
        return GaussRat(_frac(x), Fraction(0))

    def __post_init__(self):
        if not isinstance(self.re, Fraction):
            object.__setattr__(self, "re", Fraction(self.re))
        if not isinstance(self.im, Fraction):
            object.__setattr__(self, "im", Fraction(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __add__(self, o: "GaussRat") -> "GaussRat":
        return GaussRat(self.re + o.re, self.im + o.im)

    def __sub__(self, o: "GaussRat") -> "GaussRat":
        return GaussRat(self.re - o.re, self.im - o.im)

    def __neg__(self) -> "GaussRat":
        return GaussRat(-self.re, -self.im)

    def __mul__(self, o: "GaussRat") -> "GaussRat":
        if not o.im and not self.im:
            return GaussRat(self.re * o.re, Fraction(0))
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __truediv__(self, o: "GaussRat") -> "GaussRat":
        d = o.re * o.re + o.im * o.im
        if not d:
            raise DivisionByZero("division by zero Gaussian rational")
        n = self * o.conj()
        return GaussRat(n.re / d, n.im / d)

    def conj(self) -> "GaussRat":
        return GaussRat(self.re, -self.im)

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def text(self) -> str:
        def f(q: Fraction) -> str:
            return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"

        sign = "-" if self.im < 0 else "+"
        return f"({f(self.re)}{sign}{f(abs(self.im))}*I)"


G_ZERO = GaussRat(Fraction(0))
G_ONE = GaussRat(Fraction(1))
G_I = GaussRat(Fraction(0), Fraction(1))


def mono_key(m: Mono):
    """Graded-lex key; larger key sorts first."""
    return (sum(m), m)


def mono_text(m: Mono) -> str:
    parts = []
    for v in PRINT_ORDER:
        e = m[v]
        if e == 0:
            continue
        parts.append(VAR_NAMES[v] if e == 1 else f"{VAR_NAMES[v]}^{e}")
    return "*".join(parts)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], a[4] + b[4])


class ScalarPoly:
    """Immutable map monomial -> GaussRat with zero entries absent."""

    __slots__ = ("_t", "_h")

    def __init__(self, terms: Mapping[Mono, GaussRat] | Iterable = ()):
        t = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for m, c in items:
            c = GaussRat.of(c)
            if m in t:
                c = t[m] + c
            if c:
                t[m] = c
            else:
                t.pop(m, None)
        for m in t:
            if len(m) != NVARS or any(m[i] < 0 for i in (X1, X2, RV, T1)):
                raise ValueError(f"bad monomial {m}")
        self._t = t
        self._h = None

    @classmethod
    def _raw(cls, t: dict) -> "ScalarPoly":
        p = cls.__new__(cls)
        p._t = t
        p._h = None
        return p

    # construction helpers
    @classmethod
    def const(cls, c) -> "ScalarPoly":
        c = GaussRat.of(c)
        return cls._raw({ONE_MONO: c} if c else {})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "ScalarPoly":
        e = [0] * NVARS
        e[VAR_NAMES.index(name)] = power
        return cls._raw({tuple(e): G_ONE})

    @classmethod
    def mono(cls, m: Mono, c=1) -> "ScalarPoly":
        return cls._raw({tuple(m): GaussRat.of(c)}) if GaussRat.of(c) else cls._raw({})

    @property
    def terms(self) -> dict:
        return self._t

    def items(self):
        return self._t.items()

    def __len__(self) -> int:
        return len(self._t)

    def __bool__(self) -> bool:
        return bool(self._t)

    def __eq__(self, o) -> bool:
        if not isinstance(o, ScalarPoly):
            try:
                o = ScalarPoly.const(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self._t == o._t

    def __hash__(self) -> int:
        if self._h is None:
            self._h = hash(frozenset(self._t.items()))
        return self._h

    def __add__(self, o: "ScalarPoly") -> "ScalarPoly":
        return poly_add(self, o)

    def __sub__(self, o: "ScalarPoly") -> "ScalarPoly":
        return poly_add(self, -o)

    def __neg__(self) -> "ScalarPoly":
        return ScalarPoly._raw({m: -c for m, c in self._t.items()})

    def __mul__(self, o) -> "ScalarPoly":
        if not isinstance(o, ScalarPoly):
            o = ScalarPoly.const(o)
        return poly_mul(self, o)

    __rmul__ = __mul__

    def scale(self, c) -> "ScalarPoly":
        c = GaussRat.of(c)
        if not c:
            return ScalarPoly._raw({})
        return ScalarPoly._raw({m: v * c for m, v in self._t.items()})

    def conj(self) -> "ScalarPoly":
        return ScalarPoly._raw({m: c.conj() for m, c in self._t.items()})

    def sorted_items(self):
        return sorted(self._t.items(), key=lambda kv: mono_key(kv[0]), reverse=True)

    def degree_in(self, var: int) -> set:
        return {m[var] for m in self._t}

    def xi_degrees(self) -> set:
        return {m[X1] + m[X2] for m in self._t}

    def diff(self, var: int) -> "ScalarPoly":
        out = {}
        for m, c in self._t.items():
            e = m[var]
            if e == 0:
                continue
            n = list(m)
            n[var] = e - 1
            out[tuple(n)] = c * GaussRat(Fraction(e))
        return ScalarPoly._raw(out)

    def split_by(self, key) -> dict:
        """Group terms by ``key(mono)``."""
        out: dict = {}
        for m, c in self._t.items():
            out.setdefault(key(m), {})[m] = c
        return {k: ScalarPoly._raw(v) for k, v in out.items()}

    def is_const(self) -> bool:
        return not self._t or (len(self._t) == 1 and ONE_MONO in self._t)

    def const_value(self) -> GaussRat:
        if not self._t:
            return G_ZERO
        if not self.is_const():
            raise ValueError("not a constant")
        return self._t[ONE_MONO]

    def text(self) -> str:
        if not self._t:
            return "(0+0*I)"
        out = []
        for m, c in self.sorted_items():
            mt = mono_text(m)
            out.append(c.text() + ("*" + mt if mt else ""))
        return " + ".join(out)

    def __repr__(self) -> str:
        return f"ScalarPoly({self.text()})"


def poly_add(a: ScalarPoly, b: ScalarPoly) -> ScalarPoly:
    if len(a._t) < len(b._t):
        a, b = b, a
    t = dict(a._t)
    for m, c in b._t.items():
        if m in t:
            s = t[m] + c
            if s:
                t[m] = s
            else:
                del t[m]
        else:
            t[m] = c
    return ScalarPoly._raw(t)


def poly_mul(a: ScalarPoly, b: ScalarPoly) -> ScalarPoly:
    t: dict = {}
    for ma, ca in a._t.items():
        for mb, cb in b._t.items():
            m = mono_mul(ma, mb)
            c = ca * cb
            if m in t:
                s = t[m] + c
                if s:
                    t[m] = s
                else:
                    del t[m]
            else:
                t[m] = c
    return ScalarPoly._raw(t)


def poly_eval(p: ScalarPoly, assign: Mapping[str, complex], precision: int = 20):
    """Evaluate with mpmath at ``precision`` decimal digits; returns mpc."""
    with mpmath.workdps(precision + 5):
        vals = {}
        used = set()
        for m in p._t:
            for i, e in enumerate(m):
                if e:
                    used.add(i)
        for i in used:
            name = VAR_NAMES[i]
            if name not in assign:
                raise MissingAssignment(name)
            vals[i] = mpmath.mpmathify(assign[name])
        if T2 in vals and vals[T2] == 0 and any(m[T2] < 0 for m in p._t):
            raise DivisionByZero("t2 = 0 with a negative exponent")
        total = mpmath.mpc(0)
        for m, c in p._t.items():
            term = mpmath.mpc(mpmath.mpf(c.re.numerator) / c.re.denominator,
                              mpmath.mpf(c.im.numerator) / c.im.denominator)
            for i, e in enumerate(m):
                if e:
                    term *= vals[i] ** e
            total += term
        return +total


_COEF = re.compile(r"^\(\s*([+-]?\d+(?:/\d+)?)\s*([+-])\s*(\d+(?:/\d+)?)\s*\*\s*I\s*\)$")
_MONO_FACTOR = re.compile(r"^(t1|t2|x1|x2|r)(?:\^(-?\d+))?$")


def parse_coeff(tok: str) -> GaussRat:
    m = _COEF.match(tok.strip())
    if not m:
        raise ValueError(f"bad coefficient {tok!r}")
    im = Fraction(m.group(3))
    return GaussRat(Fraction(m.group(1)), -im if m.group(2) == "-" else im)


def parse_mono_factor(tok: str):
    """Return (var index, exponent) or None if ``tok`` is not a scalar factor."""
    m = _MONO_FACTOR.match(tok.strip())
    if not m:
        return None
    return VAR_NAMES.index(m.group(1)), int(m.group(2) or 1)


def split_top(s: str, sep: str) -> list:
    """Split on ``sep`` outside parentheses."""
    out, depth, cur = [], 0, []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and s.startswith(sep, i):
            out.append("".join(cur))
            cur = []
            i += len(sep)
            continue
        cur.append(ch)
        i += 1
    out.append("".join(cur))
    return [x.strip() for x in out if x.strip()]


def parse_poly(text: str) -> ScalarPoly:
    """Parse the canonical text form."""
    terms = {}
    for tok in split_top(text, " + "):
        c = G_ONE
        e = [0] * NVARS
        for f in split_top(tok, "*"):
            if f.startswith("("):
                c = c * parse_coeff(f)
                continue
            mf = parse_mono_factor(f)
            if mf is None:
                raise ValueError(f"bad factor {f!r}")
            e[mf[0]] += mf[1]
        m = tuple(e)
        terms[m] = terms.get(m, G_ZERO) + c
    return ScalarPoly(terms)


# frequently used polynomials
def P(c) -> ScalarPoly:
    return ScalarPoly.const(c)


XI1 = ScalarPoly.var("x1")
XI2 = ScalarPoly.var("x2")
TAU1 = ScalarPoly.var("t1")
TAU2 = ScalarPoly.var("t2")
R = ScalarPoly.var("r")
I_POLY = ScalarPoly.const(G_I)
TAU = TAU1 + I_POLY * TAU2
TAUBAR = TAU1 - I_POLY * TAU2
ABS_TAU2 = TAU1 * TAU1 + TAU2 * TAU2
# the shared leading-symbol quadratic form xi1^2 + 2 tau1 xi1 xi2 + |tau|^2 xi2^2
QFORM = XI1 * XI1 + P(2) * TAU1 * XI1 * XI2 + ABS_TAU2 * XI2 * XI2
