"""Registry of the one- and two-variable modular functions.

Every function is an element of the rational function field
Q(X, Y, LU, LV).  In the (u, v) view X = sqrt(u), Y = sqrt(v), LU = log u,
LV = log v; in the exponential view u = e^s, v = e^t, so the same element reads
X = e^{s/2}, LU = s.  Hyperbolic functions of s, t are therefore rational, and
the substitution u = e^s is the identity on representations.  Since X, Y, LU,
LV are algebraically independent, two functions agree iff their field elements
agree, which makes equality exact and decidable.

Evaluation uses mpmath.  Close to the removable singular lines s = 0, t = 0,
s + t = 0 the normal form is replaced by a Taylor expansion whose coefficients
come from exact series division of numerator and denominator.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np
import sympy
from sympy import QQ
from sympy.polys.fields import field
from sympy.polys.rings import ring

KF, X, Y, LU, LV = field("X,Y,LU,LV", QQ)
_TAY, _SIG, _TAU = ring("sig,tau", QQ)

UV = "uv"
ST = "st"


class UnknownFunction(KeyError):
    pass


class NotRational(TypeError):
    pass


class NotRemovable(ArithmeticError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    precision: int = 33
    eps_s: float = 1e-3
    taylor_order: int = 10

    def __post_init__(self):
        if self.precision < 33:
            raise ValueError("precision must be at least 33 digits")
        if self.taylor_order < 6:
            raise ValueError("Taylor order must be at least 6")


DEFAULT_CFG = EvalConfig()


def _q(c) -> object:
    if isinstance(c, Fraction):
        return QQ(c.numerator, c.denominator)
    return QQ(c)


@dataclass(frozen=True)
class ModFun:
    """A modular function of one or two variables, stored in normal form."""

    expr: object
    arity: int = 1
    view: str = UV

    def _lift(self, o) -> "ModFun":
        if isinstance(o, ModFun):
            if o.view != self.view:
                raise NotRational("mixing (u, v) and (s, t) views; convert with exp_view first")
            return o
        return ModFun(KF(_q(o)), self.arity, self.view)

    def __add__(self, o):
        o = self._lift(o)
        return ModFun(self.expr + o.expr, max(self.arity, o.arity), self.view)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return ModFun(self.expr - o.expr, max(self.arity, o.arity), self.view)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __neg__(self):
        return ModFun(-self.expr, self.arity, self.view)

    def __mul__(self, o):
        o = self._lift(o)
        return ModFun(self.expr * o.expr, max(self.arity, o.arity), self.view)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        return ModFun(self.expr / o.expr, max(self.arity, o.arity), self.view)

    def __pow__(self, n: int):
        return ModFun(self.expr ** n, self.arity, self.view)

    def is_zero(self) -> bool:
        return self.expr.numer == 0

    def text(self) -> str:
        e = self.expr.as_expr()
        names = {UV: ("sqrt(u)", "sqrt(v)", "log(u)", "log(v)"),
                 ST: ("exp(s/2)", "exp(t/2)", "s", "t")}[self.view]
        syms = KF.symbols
        return str(e.subs({s: sympy.Symbol(n) for s, n in zip(syms, names)}))


ModFun1 = ModFun
ModFun2 = ModFun


def _fun(e, arity, view=UV) -> ModFun:
    return ModFun(e if hasattr(e, "numer") else KF(e), arity, view)


# ---------------------------------------------------------------- substitutions

def _subst(e, images) -> object:
    """Replace (X, Y, LU, LV) by the given field elements."""

    def poly(p):
        out = KF(0)
        for mono, c in p.terms():
            t = KF(c)
            for img, k in zip(images, mono):
                if k:
                    t = t * img ** k
            out = out + t
        return out

    return poly(e.numer) / poly(e.denom)


def exp_view(f: ModFun) -> ModFun:
    """u = e^s, v = e^t: the same normal form read in the exponential view."""
    return ModFun(f.expr, f.arity, ST)


def uv_view(f: ModFun) -> ModFun:
    return ModFun(f.expr, f.arity, UV)


def at_sum(f: ModFun) -> ModFun:
    """One-variable f  ->  (s, t) |-> f(s + t)  (i.e. f(uv) in the (u, v) view)."""
    if f.arity != 1:
        raise ValueError("at_sum needs a one-variable function")
    return ModFun(_subst(f.expr, (X * Y, KF(1), LU + LV, KF(0))), 2, f.view)


def in_second(f: ModFun) -> ModFun:
    """One-variable f  ->  (s, t) |-> f(t)."""
    if f.arity != 1:
        raise ValueError("in_second needs a one-variable function")
    return ModFun(_subst(f.expr, (Y, KF(1), LV, KF(0))), 2, f.view)


def swap(f: ModFun) -> ModFun:
    """(s, t) |-> f(t, s)."""
    return ModFun(_subst(f.expr, (Y, X, LV, LU)), 2, f.view)


def monomial(a: Fraction, b: Fraction = Fraction(0), view: str = UV) -> ModFun:
    """u^a v^b with half-integer exponents (e^{a s + b t} in the exponential view)."""
    a, b = Fraction(a), Fraction(b)
    if (2 * a).denominator != 1 or (2 * b).denominator != 1:
        raise ValueError("exponents must be half-integers")
    return ModFun(X ** int(2 * a) * Y ** int(2 * b), 2 if b else 1, view)


def normal_equal(a: ModFun, b: ModFun) -> bool:
    for f in (a, b):
        if not isinstance(f, ModFun):
            raise NotRational(f"{f!r} has no rational normal form")
    if a.view != b.view:
        raise NotRational("views differ; convert with exp_view first")
    return a.expr.numer * b.expr.denom - b.expr.numer * a.expr.denom == 0


# ---------------------------------------------------------------- building blocks

_u = X ** 2
_v = Y ** 2


def L_closed(m: int) -> ModFun:
    """(-1)^m (u-1)^{-(m+1)} (log u - sum_{j=1}^m (-1)^{j+1} (u-1)^j / j)."""
    s = KF(0)
    for j in range(1, m + 1):
        s = s + KF(QQ((-1) ** (j + 1), j)) * (_u - 1) ** j
    return _fun((-1) ** m * (LU - s) / (_u - 1) ** (m + 1), 1)


_xs, _us, _vs = sympy.symbols("x u v", positive=True)


def _pf_integral(integrand, poles) -> object:
    """int_0^oo of a rational function of x with the given (alpha, log alpha) poles.

    ``poles`` maps the pole location -alpha (as alpha) to its log as a field
    element.  Residues come from derivatives of (x+alpha)^p f(x) at x = -alpha.
    """
    total = KF(0)
    log_part = KF(0)
    for alpha, (order, log_alpha) in poles.items():
        g = sympy.cancel(integrand * (_xs + alpha) ** order)
        for k in range(order, 0, -1):
            d = order - k
            a_k = sympy.cancel(sympy.diff(g, _xs, d).subs(_xs, -alpha) / sympy.factorial(d))
            a_k = _sym_to_field(a_k)
            if k == 1:
                log_part = log_part - a_k * log_alpha
            else:
                total = total + a_k / (KF(k - 1) * _sym_to_field(alpha) ** (k - 1))
    return total + log_part


def _sym_to_field(e) -> object:
    e = sympy.cancel(sympy.sympify(e).subs({_us: sympy.Symbol("X") ** 2, _vs: sympy.Symbol("Y") ** 2}))
    return KF.from_expr(e)


def L_derived(m: int) -> ModFun:
    f = _xs ** m / (_xs + 1) ** (m + 1) / (_xs * _us + 1)
    poles = {sympy.Integer(1): (m + 1, KF(0)), 1 / _us: (1, -LU)}
    return _fun(_pf_integral(f, poles), 1)


def D_derived(m: int, mp: int) -> ModFun:
    """int_0^oo (x/u + 1)^{-m} x^{m+m'-1} (x+1)^{-m'} (x v + 1)^{-1} dx by partial fractions."""
    f = _us ** m / (_xs + _us) ** m * _xs ** (m + mp - 1) / (_xs + 1) ** mp / (_xs + 1 / _vs)
    poles = {_us: (m, LU), sympy.Integer(1): (mp, KF(0)), 1 / _vs: (1, -LV)}
    return _fun(_pf_integral(f, poles) / _v, 2)


def _printed_D() -> dict:
    u, v, iu = _u, _v, _u ** -1
    lu_inv, lv = -LU, LV
    d11 = ((-1 + v) * lu_inv - (-1 + iu) * lv) / ((-1 + iu) * (-1 + v) * (-iu + v))
    d22 = (u * ((-1 + v) * ((-1 + iu) * (iu - v) * (1 + iu ** 2 - (1 + iu) * v)
                            + ((-1 + 3 * iu - 2 * v) * (-1 + v) * lu_inv) / u)
                - ((-1 + iu) ** 3 * lv) / u)) / ((-1 + iu) ** 3 * (iu - v) ** 2 * (-1 + v) ** 2)
    d12 = (((-1 + v) ** 2 * lu_inv + (-1 + iu) * ((iu - v) * (-1 + v) - (-1 + iu) * lv))
           / ((-1 + iu) ** 2 * (iu - v) * (-1 + v) ** 2))
    d21 = (u * ((-1 + v) * ((-1 + iu) * (iu - v) + ((1 - 2 * iu + v) * lu_inv) / u)
                + ((-1 + iu) ** 2 * lv) / u)) / ((-1 + iu) ** 2 * (iu - v) ** 2 * (-1 + v))
    d31 = (u ** 2 * ((-1 + v) * ((-1 + iu) * (iu - v) * (5 * iu ** 2 + v - (3 * (1 + v)) * iu)
                                 - (2 * (1 + 3 * iu ** 2 + v + v ** 2 - (3 * (1 + v)) * iu) * lu_inv) / u ** 2)
                     + (2 * (-1 + iu) ** 3 * lv) / u ** 2)) / (2 * (-1 + iu) ** 3 * (iu - v) ** 3 * (-1 + v))
    return {(1, 1): d11, (2, 2): d22, (1, 2): d12, (2, 1): d21, (3, 1): d31}


def _combo(table, ds) -> object:
    """Sum of coeff * D_{m,m'} * u^a v^b over rows (coeff, (m, m'), a, b)."""
    out = KF(0)
    for c, mm, a, b in table:
        out = out + KF(_q(Fraction(c))) * ds[mm] * X ** int(2 * Fraction(a)) * Y ** int(2 * Fraction(b))
    return out


h = Fraction(1, 2)

# rows (coeff, (m, m'), u-exponent, v-exponent), transcribed term by term
F_ROWS = [
    (2, (2, 2), -1, h), (2, (2, 2), -1, 0), (2, (2, 2), -3 * h, h), (2, (2, 2), -3 * h, 0),
    (4, (3, 1), -2, h), (4, (3, 1), -2, 0), (4, (3, 1), -5 * h, h), (4, (3, 1), -5 * h, 0),
    (-2, (1, 2), -h, h), (-2, (1, 2), -h, 0),
    (-4, (2, 1), -1, h), (-6, (2, 1), -1, 0), (-6, (2, 1), -3 * h, h), (-8, (2, 1), -3 * h, 0),
    (2, (1, 1), -h, h), (4, (1, 1), -h, 0),
]

G_ROWS = [
    (2, (2, 2), -1, h), (2, (2, 2), -1, 0), (2, (2, 2), -3 * h, h), (2, (2, 2), -3 * h, 0),
    (4, (3, 1), -2, h), (4, (3, 1), -2, 0), (4, (3, 1), -5 * h, h), (4, (3, 1), -5 * h, 0),
    (-4, (2, 1), -1, h), (-4, (2, 1), -1, 0), (-4, (2, 1), -3 * h, h), (-4, (2, 1), -3 * h, 0),
    (-1, (1, 2), 0, h), (-1, (1, 2), -h, h), (-1, (1, 2), -h, 0), (-1, (1, 2), 0, 0),
    (-1, (2, 1), -3 * h, h), (-1, (2, 1), -1, h), (-1, (2, 1), -3 * h, 0), (-1, (2, 1), -1, 0),
    (-1, (2, 1), -1, 0), (-1, (2, 1), -1, h), (-1, (2, 1), -3 * h, 0), (-1, (2, 1), -3 * h, h),
    (1, (1, 1), -h, h), (1, (1, 1), 0, h), (1, (1, 1), -h, 0), (1, (1, 1), 0, 0),
]

L_ROWS = [
    (-1, (1, 2), -h, h), (-1, (1, 2), 0, h), (-1, (1, 2), -h, 0), (-1, (1, 2), 0, 0),
    (-1, (2, 1), -3 * h, h), (-1, (2, 1), -1, h), (-1, (2, 1), -3 * h, 0), (-1, (2, 1), -1, 0),
    (1, (2, 1), -1, 0), (1, (2, 1), -1, h), (1, (2, 1), -3 * h, 0), (1, (2, 1), -3 * h, h),
    (1, (1, 1), -h, h), (1, (1, 1), 0, h), (1, (1, 1), -h, 0), (1, (1, 1), 0, 0),
]


def _printed_closed_uv() -> dict:
    u, v, su, sv = _u, _v, X, Y
    f1 = -(su * (2 - 2 * u + (1 + u) * LU)) / ((-1 + su) ** 3 * (1 + su) ** 2)
    f2 = 2 * (-1 + u ** 2 - 2 * u * LU) / (-1 + u) ** 3
    g1 = (-1 + u ** 2 - 2 * u * LU) / ((-1 + su) ** 3 * (1 + su) ** 2)
    g2 = 2 * (-1 + u ** 2 - 2 * u * LU) / (-1 + u) ** 3
    F = (2 * u * (-(((-1 + u * v) * (1 + su * (-1 - sv - (-2 + su + u) * v + u * v * sv)))
                    / ((-1 + su) * (-1 + sv)))
                  + (su * sv * (-1 - su + u + u * (-2 - su + 2 * u) * sv + u * (-1 + su + u) * v
                                + u ** 2 * su * v * sv) * LU) / ((-1 + su) ** 2 * (1 + su))
                  + (sv * (1 - su * sv * (-1 - sv + v + u * v * (-1 + sv + v) + su * (-2 + sv + 2 * v))) * LV)
                  / ((-1 + sv) ** 2 * (1 + sv)))) / (-1 + u * v) ** 3
    G = -(su * (u * (-1 + v) ** 2 * (-1 + u * v * (-4 + u * (4 + v))) * (-LU)
                + (-1 + u) * ((1 + u * (-2 + v)) * (-1 + v) * (-1 + u * v) * (1 + u * v)
                              + (-1 + u) * v * (-1 + u * (-4 + v * (4 + u * v))) * LV))) / (
        (-1 + su) ** 2 * (1 + su) * (-1 + sv) ** 2 * (1 + sv) * (-1 + u * v) ** 3)
    L = (su * (u * (-1 + v) ** 2 * (-LU) + (-1 + u) * ((-1 + v) * (-1 + u * v) + (v - u * v) * LV))) / (
        (-1 + su) ** 2 * (1 + su) * (-1 + sv) ** 2 * (1 + sv) * (-1 + u * v))
    g = 4 * ((su * sv - 1) * LU - (su - 1) * (LU + LV)) / (LV * LU * (LU + LV))
    return {"f1": (f1, 1), "f2": (f2, 1), "g1": (g1, 1), "g2": (g2, 1),
            "F": (F, 2), "G": (G, 2), "L": (L, 2), "g": (g, 2)}


# hyperbolic helpers in the exponential view (s = LU, t = LV, e^{s/2} = X)
def _ch(e):
    return (e + e ** -1) / 2


def _sh(e):
    return (e - e ** -1) / 2


def _ND():
    s, t = LU, LV
    es, et, est = X ** 2, Y ** 2, X ** 2 * Y ** 2
    num = (-t * (s + t) * _ch(es) + s * (s + t) * _ch(et)
           - (s - t) * (s + t + _sh(es) + _sh(et) - _sh(est)))
    den = s * t * (s + t) * _sh(X) * _sh(Y) * _sh(X * Y) ** 2
    return num, den


def _printed_closed_st() -> dict:
    s, t, x = LU, LV, LU
    ex, ehx = X ** 2, X
    es, et, est = X ** 2, Y ** 2, X ** 2 * Y ** 2
    num, den = _ND()
    w_num = -s - t + t * _ch(es) + s * _ch(et) + _sh(es) + _sh(et) - _sh(est)
    return {
        "K": (2 * ehx * (2 + ex * (-2 + x) + x) / ((-1 + ex) ** 2 * x), 1),
        "S": (-4 * ex * (-x + _sh(ex)) / ((-1 + ehx) ** 2 * (1 + ehx) ** 2 * x), 1),
        "H": (-num / den, 2),
        "T": (-_ch(X * Y) * num / den, 2),
        "W": (w_num / (s * t * _sh(X) * _sh(Y) * _sh(X * Y)), 2),
        "R1": ((KF(QQ(1, 2)) - _sh(X) / x) / _sinh2_quarter(), 1),
        "R2": (-(1 + _ch(X * Y)) * num / den, 2),
        "R1g": ((KF(QQ(1, 2)) + _sh(X) / x) / _cosh2_quarter(), 1),
        "R2g": (-(1 - _ch(X * Y)) * num / den, 2),
    }


def _sinh2_quarter():
    # sinh^2(x/4) = (cosh(x/2) - 1) / 2
    return (_ch(X) - 1) / 2


def _cosh2_quarter():
    return (_ch(X) + 1) / 2


# printed hyperbolic forms, transcribed literally for numeric cross-checks
def _N_mp(s, t):
    ch, sh = mpmath.cosh, mpmath.sinh
    return -t * (s + t) * ch(s) + s * (s + t) * ch(t) - (s - t) * (s + t + sh(s) + sh(t) - sh(s + t))


def _D_mp(s, t):
    sh = mpmath.sinh
    return s * t * (s + t) * sh(s / 2) * sh(t / 2) * sh((s + t) / 2) ** 2


def _Wn_mp(s, t):
    ch, sh = mpmath.cosh, mpmath.sinh
    return -s - t + t * ch(s) + s * ch(t) + sh(s) + sh(t) - sh(s + t)


PRINTED_NUMERIC: dict[str, list[Callable]] = {
    "K": [lambda x: 2 * mpmath.exp(x / 2) * (2 + mpmath.exp(x) * (-2 + x) + x) / ((-1 + mpmath.exp(x)) ** 2 * x)],
    "S": [lambda x: -4 * mpmath.exp(x) * (-x + mpmath.sinh(x))
          / ((-1 + mpmath.exp(x / 2)) ** 2 * (1 + mpmath.exp(x / 2)) ** 2 * x)],
    "H": [lambda s, t: -_N_mp(s, t) / _D_mp(s, t)],
    "T": [lambda s, t: -mpmath.cosh((s + t) / 2) * _N_mp(s, t) / _D_mp(s, t)],
    "W": [lambda s, t: -4 * _Wn_mp(s, t) / (s * t * (mpmath.sinh(s) + mpmath.sinh(t) - mpmath.sinh(s + t))),
          lambda s, t: _Wn_mp(s, t) / (s * t * mpmath.sinh(s / 2) * mpmath.sinh(t / 2) * mpmath.sinh((s + t) / 2))],
    "R1": [lambda x: -2 * mpmath.coth(x / 4) / x + 1 / (2 * mpmath.sinh(x / 4) ** 2),
           lambda x: (mpmath.mpf(1) / 2 - mpmath.sinh(x / 2) / x) / mpmath.sinh(x / 4) ** 2],
    "R1g": [lambda x: (x + 2 * mpmath.sinh(x / 2)) / (x + x * mpmath.cosh(x / 2)),
            lambda x: (mpmath.mpf(1) / 2 + mpmath.sinh(x / 2) / x) / mpmath.cosh(x / 4) ** 2],
    "R2": [lambda s, t: -(1 + mpmath.cosh((s + t) / 2)) * _N_mp(s, t) / _D_mp(s, t)],
    "R2g": [lambda s, t: -(1 - mpmath.cosh((s + t) / 2)) * _N_mp(s, t) / _D_mp(s, t)],
}


# ---------------------------------------------------------------- registry

@dataclass
class Entry:
    name: str
    arity: int
    view: str
    definition: ModFun
    closed: ModFun
    doc: str = ""
    assembled: ModFun | None = None


def _ldef(coeffs) -> ModFun:
    """sum c * L_m * u^a over rows (c, m, a)."""
    out = KF(0)
    for c, m, a in coeffs:
        out = out + KF(_q(Fraction(c))) * L_closed(m).expr * X ** int(2 * Fraction(a))
    return _fun(out, 1)


def _exp_factor_a(f1var: ModFun) -> ModFun:
    """(e^{x/2} - 1) / x in the exponential view."""
    return ModFun((X - 1) / LU, 1, ST)


def _build_registry() -> dict:
    reg: dict[str, Entry] = {}

    def put(name, arity, view, definition, closed, doc=""):
        reg[name] = Entry(name, arity, view, _fun(definition, arity, view), _fun(closed, arity, view), doc)

    for m in range(4):
        put(f"L{m}", 1, UV, L_derived(m).expr, L_closed(m).expr, f"modified logarithm L_{m}(u)")
    printed = _printed_D()
    for mm, e in printed.items():
        put(f"D{mm[0]}{mm[1]}", 2, UV, D_derived(*mm).expr, e, f"D_{{{mm[0]},{mm[1]}}}(u, v)")
    closed = _printed_closed_uv()
    put("f1", 1, UV, _ldef([(-2, 2, h), (-2, 2, 0), (1, 1, h), (3, 1, 0), (-1, 0, 0)]).expr,
        closed["f1"][0], "functions half, k^{-1} d d(k) slot")
    put("f2", 1, UV, _ldef([(-4, 2, 0), (4, 1, 0)]).expr, closed["f2"][0], "functions half, k^{-2} d(k) d(k) slot")
    put("g1", 1, UV, _ldef([(-2, 2, h), (-2, 2, 0), (2, 1, h), (2, 1, 0)]).expr,
        closed["g1"][0], "forms half, k^{-1} d d(k) slot")
    put("g2", 1, UV, _ldef([(-4, 2, 0), (4, 1, 0)]).expr, closed["g2"][0], "forms half, k^{-2} d(k) d(k) slot")
    put("F", 2, UV, _combo(F_ROWS, printed), closed["F"][0], "functions half, two-letter slot")
    put("G", 2, UV, _combo(G_ROWS, printed), closed["G"][0], "forms half, two-letter slot")
    put("L", 2, UV, _combo(L_ROWS, printed), closed["L"][0], "forms half, antisymmetric slot")
    put("g", 2, UV, closed["g"][0], closed["g"][0], "log-basis rewrite of k^{-1} d_i d_j(k)")

    # exponential view
    ef = {n: exp_view(reg[n].closed) for n in ("f1", "f2", "g1", "g2", "F", "G", "L", "g")}
    a_half = ModFun((X - 1) / LU, 1, ST)  # (e^{x/2} - 1) / x
    b_s = ModFun((X ** 2 - X) / LU, 2, ST)  # (e^s - e^{s/2}) / s
    c_s = ModFun((X ** -1 - 1) / LU, 2, ST)  # (e^{-s/2} - 1) / s
    d_t = ModFun((Y - 1) / LV, 2, ST)  # (e^{t/2} - 1) / t
    K = -2 * ef["f1"] * a_half
    S = -2 * ef["g1"] * a_half
    H = -2 * at_sum(ef["f1"]) * ef["g"] - 4 * at_sum(ef["f2"]) * b_s * d_t + 4 * ef["F"] * c_s * d_t
    T = -2 * at_sum(ef["g1"]) * ef["g"] - 4 * at_sum(ef["g2"]) * b_s * d_t + 4 * ef["G"] * c_s * d_t
    W = 4 * ef["L"] * c_s * d_t
    pc = _printed_closed_st()
    for name, fn, doc in (("K", K, "functions half, linear log-basis slot"),
                          ("S", S, "forms half, linear log-basis slot"),
                          ("H", H, "functions half, bilinear log-basis slot"),
                          ("T", T, "forms half, bilinear log-basis slot"),
                          ("W", W, "forms half, antisymmetric log-basis slot")):
        put(name, fn.arity, ST, fn.expr, pc[name][0], doc)
    put("R1", 1, ST, (K + S).expr, pc["R1"][0], "curvature, linear slot")
    put("R2", 2, ST, (H + T).expr, pc["R2"][0], "curvature, bilinear slot")
    put("R1g", 1, ST, (K - S).expr, pc["R1g"][0], "chiral curvature, linear slot")
    put("R2g", 2, ST, (H - T).expr, pc["R2g"][0], "chiral curvature, bilinear slot")
    return reg


@functools.lru_cache(maxsize=1)
def registry() -> dict:
    return _build_registry()


def names() -> list:
    return list(registry())


def entry(name: str) -> Entry:
    reg = registry()
    if name not in reg:
        m = _parse_D(name)
        if m is not None:
            reg[name] = Entry(name, 2, UV, D_derived(*m), D_derived(*m), f"D_{{{m[0]},{m[1]}}}(u, v)")
        else:
            raise UnknownFunction(name)
    return reg[name]


def _parse_D(name: str):
    if len(name) == 3 and name[0] == "D" and name[1:].isdigit():
        return int(name[1]), int(name[2])
    return None


def closed_form(name: str) -> ModFun:
    return entry(name).closed


def definition(name: str) -> ModFun:
    return entry(name).definition


def register_assembled(name: str, expr: ModFun) -> None:
    e = entry(name)
    if expr.view != e.view:
        expr = exp_view(expr) if e.view == ST else uv_view(expr)
    e.assembled = expr


def assembled(name: str) -> ModFun:
    e = entry(name)
    return e.assembled if e.assembled is not None else e.definition


def verify(name: str) -> dict:
    """Exact comparison of the definition (and any pipeline-assembled form) with the closed form."""
    e = entry(name)
    out = {"name": name, "definition_equals_closed": normal_equal(e.definition, e.closed)}
    if e.assembled is not None:
        out["assembled_equals_closed"] = normal_equal(e.assembled, e.closed)
    return out


def symmetry_report() -> dict:
    """Exact symmetry identities of the bilinear slot functions."""
    reg = registry()
    W, H, T = reg["W"].closed, reg["H"].closed, reg["T"].closed
    return {
        "W(s,t) = W(t,s)": normal_equal(W, swap(W)),
        "H(s,t) + H(t,s) = 0": (H + swap(H)).is_zero(),
        "T(s,t) + T(t,s) = 0": (T + swap(T)).is_zero(),
    }


# ---------------------------------------------------------------- series near singular sets

def _poly_terms(p) -> list:
    return [(m, Fraction(int(c.numerator), int(c.denominator))) for m, c in p.terms()]


def _exp_coeff(a: Fraction, n: int) -> Fraction:
    """Coefficient of w^n in e^{a w}."""
    return a ** n / math.factorial(n) if n >= 0 else Fraction(0)


def _line_series(terms, line: str, kmax: int) -> list:
    """Coefficients of w^k (k <= kmax), each a dict free-monomial -> Fraction.

    line "s": w = s, free (Y, LV);  line "t": w = t, free (X, LU);
    line "st": w = s + t, free (X, LU) with X Laurent (Y = e^{w/2}/X, LV = w - LU).
    """
    out = [dict() for _ in range(kmax + 1)]

    def add(k, key, c):
        if c:
            d = out[k]
            d[key] = d.get(key, 0) + c
            if not d[key]:
                del d[key]

    for (a, c, b, d), coef in terms:
        if line == "s":
            for k in range(b, kmax + 1):
                add(k, (c, d), coef * _exp_coeff(Fraction(a, 2), k - b))
        elif line == "t":
            for k in range(d, kmax + 1):
                add(k, (a, b), coef * _exp_coeff(Fraction(c, 2), k - d))
        else:
            for e in range(d + 1):
                base = coef * math.comb(d, e) * (-1) ** (d - e)
                key = (a - c, b + d - e)
                for k in range(e, kmax + 1):
                    add(k, key, base * _exp_coeff(Fraction(c, 2), k - e))
    return out


def _origin_series(terms, kmax: int) -> list:
    """Coefficients of lambda^k under (s, t) -> lambda (sig, tau), in Q[sig, tau]."""
    out = [_TAY(0) for _ in range(kmax + 1)]
    for (a, c, b, d), coef in terms:
        lin = QQ(a, 2) * _SIG + QQ(c, 2) * _TAU
        base = _TAY(QQ(coef.numerator, coef.denominator)) * _SIG ** b * _TAU ** d
        p = base
        for n in range(0, kmax - b - d + 1):
            out[b + d + n] += p
            p = p * lin / (n + 1)
    return out


def _one_var_series(terms, kmax: int) -> list:
    out = [Fraction(0)] * (kmax + 1)
    for (a, c, b, d), coef in terms:
        for k in range(b, kmax + 1):
            out[k] += coef * _exp_coeff(Fraction(a, 2), k - b)
    return out


def _valuation(seq, is_zero) -> int:
    for i, x in enumerate(seq):
        if not is_zero(x):
            return i
    raise NotRemovable("denominator vanishes identically along the expansion")


@functools.lru_cache(maxsize=None)
def _series_data(expr, arity: int, zone: str, order: int):
    num = _poly_terms(expr.numer)
    den = _poly_terms(expr.denom)
    # generous bound on the vanishing order of the denominator
    kmax = order + 4 * sum(expr.denom.degree(i) for i in range(4)) + 4
    if arity == 1:
        D = _one_var_series(den, kmax)
        nu = _valuation(D, lambda x: x == 0)
        N = _one_var_series(num, nu + order)
        if any(N[k] for k in range(nu)):
            raise NotRemovable("pole at the singular point")
        c = []
        for j in range(order + 1):
            acc = N[nu + j] - sum(c[i] * D[nu + j - i] for i in range(j))
            c.append(acc / D[nu])
        return c
    if zone == "origin":
        D = _origin_series(den, kmax)
        nu = _valuation(D, lambda x: x == 0)
        N = _origin_series(num, nu + order)
        if any(N[k] for k in range(nu)):
            raise NotRemovable("pole at the origin")
        P = []
        for j in range(order + 1):
            acc = N[nu + j]
            for i in range(j):
                acc = acc - P[i] * D[nu + j - i]
            q, r = acc.div(D[nu])
            if r != 0:
                raise NotRemovable("series division is not exact")
            P.append(q)
        return P
    D = _line_series(den, zone, kmax)
    nu = _valuation(D, lambda x: not x)
    N = _line_series(num, zone, nu + order)
    if any(N[k] for k in range(nu)):
        raise NotRemovable(f"pole along line {zone}")
    return nu, N, D[: nu + order + 1]


def taylor_origin(fun: ModFun, order: int = 10) -> list:
    """Homogeneous Taylor polynomials P_0..P_order at s = t = 0 (exponential view).

    One-variable functions give a list of Fractions; two-variable functions give
    dicts (i, j) -> Fraction for the coefficient of s^i t^j.
    """
    data = _series_data(fun.expr, fun.arity, "origin", order)
    if fun.arity == 1:
        return list(data)
    return [{m: Fraction(int(c.numerator), int(c.denominator)) for m, c in p.terms()} for p in data]


# ---------------------------------------------------------------- evaluation

def _mpq(c: Fraction):
    return mpmath.mpf(c.numerator) / c.denominator


def _eval_terms(terms, vals):
    total = mpmath.mpf(0)
    for mono, c in terms:
        t = _mpq(c)
        for v, k in zip(vals, mono):
            if k:
                t *= v ** k
        total += t
    return total


@functools.lru_cache(maxsize=None)
def _terms_of(expr):
    return _poly_terms(expr.numer), _poly_terms(expr.denom)


def _free_eval(d: dict, a, b):
    total = mpmath.mpf(0)
    for (i, j), c in d.items():
        total += _mpq(c) * a ** i * b ** j
    return total


def _eval_st(fun: ModFun, s, t, cfg: EvalConfig):
    eps = mpmath.mpf(cfg.eps_s)
    order = cfg.taylor_order
    if fun.arity == 1:
        if abs(s) < eps:
            c = _series_data(fun.expr, 1, "origin", order)
            return sum(_mpq(cj) * s ** j for j, cj in enumerate(c))
        return _direct(fun, s, t)
    near = [name for name, d in (("s", s), ("t", t), ("st", s + t)) if abs(d) < eps]
    if len(near) >= 2:
        P = _series_data(fun.expr, 2, "origin", order)
        total = mpmath.mpf(0)
        for p in P:
            for (i, j), c in p.terms():
                total += mpmath.mpf(int(c.numerator)) / int(c.denominator) * s ** i * t ** j
        return total
    if len(near) == 1:
        zone = near[0]
        nu, N, D = _series_data(fun.expr, 2, zone, order)
        if zone == "s":
            w, fa, fb = s, mpmath.exp(t / 2), t
        elif zone == "t":
            w, fa, fb = t, mpmath.exp(s / 2), s
        else:
            w, fa, fb = s + t, mpmath.exp(s / 2), s
        Nv = [_free_eval(x, fa, fb) for x in N]
        Dv = [_free_eval(x, fa, fb) for x in D]
        c = []
        for j in range(order + 1):
            acc = Nv[nu + j] - sum(c[i] * Dv[nu + j - i] for i in range(j))
            c.append(acc / Dv[nu])
        return sum(cj * w ** j for j, cj in enumerate(c))
    return _direct(fun, s, t)


def _direct(fun: ModFun, s, t):
    num, den = _terms_of(fun.expr)
    vals = (mpmath.exp(s / 2), mpmath.exp(t / 2), s, t)
    return _eval_terms(num, vals) / _eval_terms(den, vals)


def _to_st(fun: ModFun, point):
    pt = tuple(point) if isinstance(point, (tuple, list)) else (point,)
    if len(pt) != fun.arity:
        raise ValueError(f"expected {fun.arity} coordinates, got {len(pt)}")
    pt = [mpmath.mpf(p) if not isinstance(p, mpmath.mpf) else p for p in pt]
    if fun.view == UV:
        if any(p <= 0 for p in pt):
            raise ValueError("the (u, v) view needs positive coordinates")
        pt = [mpmath.log(p) for p in pt]
    return pt[0], (pt[1] if fun.arity == 2 else mpmath.mpf(0))


def evaluate(fun, point, cfg: EvalConfig = DEFAULT_CFG):
    """Value of a function (ModFun or registry name) at a real point."""
    if isinstance(fun, str):
        fun = assembled(fun)
    with mpmath.workdps(cfg.precision + 40):
        s, t = _to_st(fun, _as_mp(point))
        val = _eval_st(fun, s, t, cfg)
    with mpmath.workdps(cfg.precision):
        return +val


def _as_mp(point):
    if isinstance(point, (tuple, list)):
        return tuple(mpmath.mpmathify(p) for p in point)
    return mpmath.mpmathify(point)


eval = evaluate  # noqa: A001  (registry-level name used by the CLI)


def evaluate_float(fun, points, cfg: EvalConfig = DEFAULT_CFG):
    """Vectorised convenience wrapper returning a list of floats (with a value cache)."""
    cache: dict = {}
    out = []
    for p in points:
        key = tuple(p) if isinstance(p, (tuple, list)) else p
        if key not in cache:
            cache[key] = float(evaluate(fun, p, cfg))
        out.append(cache[key])
    return out


def printed_numeric(name: str, point, precision: int = 33) -> list:
    """Values of the literally transcribed printed hyperbolic forms (exponential view)."""
    if name not in PRINTED_NUMERIC:
        raise UnknownFunction(name)
    pt = point if isinstance(point, (tuple, list)) else (point,)
    with mpmath.workdps(precision + 20):
        vals = [f(*[mpmath.mpf(p) for p in pt]) for f in PRINTED_NUMERIC[name]]
    with mpmath.workdps(precision):
        return [+v for v in vals]


# ---------------------------------------------------------------- quadrature oracle

def quadrature_oracle(name: str, point, dps: int = 30):
    """Defining-integral value of L_m(u) or D_{m,m'}(u, v)."""
    pt = point if isinstance(point, (tuple, list)) else (point,)
    with mpmath.workdps(dps):
        if name.startswith("L") and name[1:].isdigit():
            m = int(name[1:])
            u = mpmath.mpf(pt[0])
            f = lambda x: x ** m / (x + 1) ** (m + 1) / (x * u + 1)
        else:
            mm = _parse_D(name)
            if mm is None:
                raise UnknownFunction(name)
            m, mp = mm
            u, v = mpmath.mpf(pt[0]), mpmath.mpf(pt[1])
            f = lambda x: (x / u + 1) ** (-m) * x ** (m + mp - 1) / (x + 1) ** mp / (x * v + 1)
        val = mpmath.quad(f, [0, 1, mpmath.inf])
    return val


# ---------------------------------------------------------------- float fast path

def vectorized(fun: ModFun, safe_radius: float = 0.5, cfg: EvalConfig = DEFAULT_CFG):
    """numpy evaluator in the exponential view; points closer than ``safe_radius``
    to a singular line are delegated to the extended-precision path."""
    num, den = _terms_of(fun.expr)

    def poly(terms, cols):
        out = np.zeros_like(cols[0])
        for mono, c in terms:
            t = np.full_like(cols[0], float(c))
            for col, k in zip(cols, mono):
                if k:
                    t = t * col ** k
            out = out + t
        return out

    def f(s, t=None):
        s = np.asarray(s, dtype=float)
        t = np.zeros_like(s) if t is None else np.asarray(t, dtype=float)
        cols = (np.exp(s / 2), np.exp(t / 2), s, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = poly(num, cols) / poly(den, cols)
        if fun.arity == 1:
            near = np.abs(s) < safe_radius
        else:
            near = (np.abs(s) < safe_radius) | (np.abs(t) < safe_radius) | (np.abs(s + t) < safe_radius)
        if near.any():
            cache: dict = {}
            idx = np.nonzero(near)
            for k in zip(*idx):
                key = (float(s[k]), float(t[k]))
                if key not in cache:
                    pt = key[0] if fun.arity == 1 else key
                    cache[key] = float(evaluate(exp_view(fun) if fun.view == UV else fun,
                                                pt if fun.view == ST else pt, cfg))
                val[k] = cache[key]
        return val

    if fun.view == UV:
        # callers always pass exponential-view coordinates
        fun = exp_view(fun)
    return f
