"""Polar coordinates, angular and radial integration of b2.

The angular stage works in units of pi and leaves out the Jacobian r/tau2.
The radial stage substitutes u = r^2 (hence a factor 1/2) and evaluates the
b0 sandwiches with the rearrangement integrals:

    int_0^oo b0^{m+1} k^{2m+2} u^m rho b0 du              = L_m(Delta)(rho)
    int_0^oo b0^m rho k^{2(m+m')} u^{m+m'-1} b0^{m'} rho' b0 du
                                                            = D_{m,m'}(Delta_1, Delta_2)(rho rho')

where b0 = (u k^2 + 1)^{-1} commutes with k and x k^n = k^n Delta^{n/2}(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import modfun
from .coeffring import G_I, G_ONE, RV, T1, T2, X1, X2, GaussRat, ScalarPoly
from .ncsymbol import (
    DK,
    B0pow,
    Kpow,
    MatrixAssignment,
    SymbolExpr,
    Word,
    eval_word,
    from_terms,
    word_text,
)
from .parametrix import FORMS, FUNCTIONS


class ResidualTau2(ArithmeticError):
    pass


class PatternMismatch(ValueError):
    pass


class UnmatchedTarget(ValueError):
    pass


# ---------------------------------------------------------------- polar substitution

@dataclass(frozen=True)
class TrigTerm:
    coeff: ScalarPoly  # in r, t1, t2 only
    trig: tuple  # (p, q): cos^p sin^q
    word: Word


def _mono(r=0, t1=0, t2=0) -> tuple:
    m = [0] * 5
    m[RV], m[T1], m[T2] = r, t1, t2
    return tuple(m)


def _xi_expansion(a: int, b: int) -> dict:
    """xi1^a xi2^b -> {(p, q): ScalarPoly} with xi1 = r cos - r (t1/t2) sin, xi2 = (r/t2) sin."""
    out: dict = {}
    for i in range(a + 1):
        c = Fraction(math.comb(a, i) * (-1) ** i)
        key = (a - i, i + b)
        mono = _mono(r=a + b, t1=i, t2=-(i + b))
        p = ScalarPoly.mono(mono, c)
        out[key] = out[key] + p if key in out else p
    return out


def polar_substitute(x: SymbolExpr) -> list:
    acc: dict = {}
    for w, c in x.items():
        for m, v in c.items():
            rest = list(m)
            rest[X1] = rest[X2] = 0
            base = ScalarPoly.mono(tuple(rest), v)
            for trig, p in _xi_expansion(m[X1], m[X2]).items():
                key = (trig, w)
                acc[key] = acc[key] + p * base if key in acc else p * base
    out = [TrigTerm(c, trig, w) for (trig, w), c in acc.items() if c]
    out.sort(key=lambda t: (word_text(t.word), t.trig))
    return out


def trig_integral(p: int, q: int) -> Fraction:
    """int_0^{2 pi} cos^p sin^q dphi in units of pi."""
    if p % 2 or q % 2:
        return Fraction(0)

    def dfact(n):
        return math.prod(range(n, 0, -2)) if n > 0 else 1

    return Fraction(2 * dfact(p - 1) * dfact(q - 1), dfact(p + q))


def angular_integrate(ts: list) -> SymbolExpr:
    """Exact angular integral (units of pi); raises ResidualTau2 on leftover 1/tau2."""
    items = []
    for t in ts:
        v = trig_integral(*t.trig)
        if v:
            items.append((t.word, t.coeff.scale(v)))
    out = from_terms(items)
    for w, c in out.items():
        if any(m[T2] < 0 for m in c.terms):
            raise ResidualTau2(f"negative tau2 power survives on {word_text(w)}: {c.text()}")
    return out


# ---------------------------------------------------------------- modular expressions

@dataclass(frozen=True)
class ModWordLetter:
    q: Fraction
    base: Word

    def __post_init__(self):
        if any(isinstance(a, B0pow) for a in self.base):
            raise ValueError("modular letters contain no b0")
        if (2 * Fraction(self.q)).denominator != 1:
            raise ValueError("Delta exponent must be a half-integer")

    def text(self) -> str:
        b = word_text(self.base)
        return b if self.q == 0 else f"Delta^{_qtext(self.q)}({b})"

    def paren(self) -> str:
        return f"({self.text()})" if self.q == 0 else self.text()


def _qtext(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class One:
    fun: str
    arg: ModWordLetter

    def text(self) -> str:
        return f"{self.fun}(Delta)({self.arg.text()})"


@dataclass(frozen=True)
class Two:
    fun: str
    left: ModWordLetter
    right: ModWordLetter

    def text(self) -> str:
        return f"{self.fun}(Delta1,Delta2)({self.left.paren()}*{self.right.paren()})"


def _app_key(a):
    if isinstance(a, One):
        return (0, a.fun, a.arg.text())
    return (1, a.fun, a.left.text(), a.right.text())


class ModularExpr:
    """Map application -> coefficient (ScalarPoly in tau only), with an overall-pi flag."""

    def __init__(self, terms=(), pi: bool = True):
        self._t: dict = {}
        self.pi = pi
        for app, c in terms:
            self.add(app, c)

    def add(self, app, c: ScalarPoly) -> None:
        if not c:
            return
        s = self._t[app] + c if app in self._t else c
        if s:
            self._t[app] = s
        else:
            self._t.pop(app, None)

    @property
    def terms(self) -> dict:
        return self._t

    def items(self):
        return sorted(self._t.items(), key=lambda kv: _app_key(kv[0]))

    def __len__(self) -> int:
        return len(self._t)

    def __bool__(self) -> bool:
        return bool(self._t)

    def __eq__(self, o) -> bool:
        return isinstance(o, ModularExpr) and self._t == o._t and self.pi == o.pi

    def coeff(self, app) -> ScalarPoly:
        return self._t.get(app, ScalarPoly._raw({}))

    def text(self) -> str:
        if not self._t:
            return "0"
        return " + ".join(f"[{c.text()}]*{a.text()}" for a, c in self.items())

    def records(self) -> list:
        return [{"coeff": c.text(), "application": a.text()} for a, c in self.items()]


# ---------------------------------------------------------------- normalisation

@dataclass(frozen=True)
class Pattern:
    """b0^{j0} L1 [k^sigma u^p] b0^{j1} L2 b0  or  b0^{j0} [k^sigma u^p] L1 b0."""

    j0: int
    left: ModWordLetter
    j1: int | None = None
    right: ModWordLetter | None = None

    @property
    def two(self) -> bool:
        return self.right is not None

    def text(self, sigma: int, p: int) -> str:
        mid = f"[k^{sigma}*u^{p}]"
        b = lambda j: "b0" if j == 1 else f"b0^{j}"
        if self.two:
            return f"{b(self.j0)}*{self.left.text()}*{mid}*{b(self.j1)}*{self.right.text()}*b0"
        return f"{b(self.j0)}*{mid}*{self.left.text()}*b0"


def _blocks(w: Word):
    """Split a word into [(b0 power, k power)] blocks separated by DK atoms."""
    blocks, dks = [], []
    j = n = 0
    for at in w:
        if isinstance(at, B0pow):
            j += at.j
        elif isinstance(at, Kpow):
            n += at.n
        else:
            blocks.append((j, n))
            dks.append(at)
            j = n = 0
    blocks.append((j, n))
    return blocks, dks


def _is_first(d: DK) -> bool:
    return d.a + d.b == 1


def delta_twist_normalize(w: Word, r_power: int):
    """Return (sigma, p, Pattern) with x k^n = k^n Delta^{n/2}(x) applied throughout."""
    if r_power % 2:
        raise PatternMismatch(f"odd r power r^{r_power} on {word_text(w)}")
    p = r_power // 2
    blocks, dks = _blocks(w)
    if len(dks) == 0 or blocks[-1][0] != 1:
        raise PatternMismatch(f"no lemma pattern for {word_text(w)}")
    j0, a = blocks[0]
    c = blocks[-1][1]
    if j0 < 1:
        raise PatternMismatch(f"word must start with b0: {word_text(w)}")
    inner = blocks[1:-1]
    q_right = Fraction(c, 2)
    if not inner:
        (d,) = dks
        # b0^j0 k^a d b0 k^c = b0^j0 k^{a+c+1} Delta^{c/2}(k^-1 d) b0
        sigma, base = a + c + 1, (Kpow(-1), d)
        if sigma != 2 * j0 or p != j0 - 1:
            raise PatternMismatch(f"exponents k^{sigma} u^{p} do not fit L_{j0 - 1}: {word_text(w)}")
        return sigma, p, Pattern(j0, ModWordLetter(q_right, base))
    if len(inner) == 1 and inner[0] == (0, 0):
        d, e = dks
        sigma, base = a + c + 2, (Kpow(-2), d, e)
        if sigma != 2 * j0 or p != j0 - 1:
            raise PatternMismatch(f"exponents k^{sigma} u^{p} do not fit L_{j0 - 1}: {word_text(w)}")
        return sigma, p, Pattern(j0, ModWordLetter(q_right, base))
    if len(inner) == 1 and inner[0][0] >= 1:
        j1, b = inner[0]
        d, e = dks
        # k^a (d k^-1) k^{b+2} b0^j1 (k^-1 e) k^c
        sigma = a + b + c + 2
        if sigma != 2 * (j0 + j1) or p != j0 + j1 - 1:
            raise PatternMismatch(
                f"exponents k^{sigma} u^{p} do not fit D_{{{j0},{j1}}}: {word_text(w)}")
        left = ModWordLetter(Fraction(-a, 2), (d, Kpow(-1)))
        right = ModWordLetter(q_right, (Kpow(-1), e))
        return sigma, p, Pattern(j0, left, j1, right)
    raise PatternMismatch(f"no lemma pattern for {word_text(w)}")


def radial_integrate(x: SymbolExpr) -> ModularExpr:
    """Apply the rearrangement integrals to the angular output (which carries r powers)."""
    out = ModularExpr(pi=True)
    half = Fraction(1, 2)
    for w, c in x.items():
        for rp, part in c.split_by(lambda m: m[RV]).items():
            coeff = ScalarPoly._raw({_strip_r(m): v for m, v in part.items()}).scale(half)
            sigma, p, pat = delta_twist_normalize(w, rp)
            if pat.two:
                app = Two(f"D{pat.j0}{pat.j1}", pat.left, pat.right)
            else:
                app = One(f"L{pat.j0 - 1}", pat.left)
            out.add(app, coeff)
    return out


def _strip_r(m: tuple) -> tuple:
    n = list(m)
    n[RV] = 0
    return tuple(n)


# ---------------------------------------------------------------- basis collection

BASIS = {
    FUNCTIONS: {"one": ("f1",), "pair": ("f2",), "two": ("F",)},
    FORMS: {"one": ("g1",), "pair": ("g2",), "two": ("G", "L")},
}


def _slot(app):
    """Undecorated target and the function of (u, v) that absorbs the decorations."""
    if isinstance(app, One):
        fun = modfun.entry(app.fun).definition * modfun.monomial(app.arg.q)
        base = app.arg.base
        kind = "one" if len(base) == 2 else "pair"
        if kind == "one" and _is_first(base[1]):
            raise UnmatchedTarget(f"first-order derivative in a one-letter slot: {app.text()}")
        if kind == "pair" and not (_is_first(base[1]) and _is_first(base[2])):
            raise UnmatchedTarget(app.text())
        return (kind, ModWordLetter(Fraction(0), base)), fun
    if not (_is_first(app.left.base[0]) and _is_first(app.right.base[1])):
        raise UnmatchedTarget(app.text())
    fun = modfun.entry(app.fun).definition * modfun.monomial(app.left.q, app.right.q)
    key = ("two", ModWordLetter(Fraction(0), app.left.base), ModWordLetter(Fraction(0), app.right.base))
    return key, fun


def _as_const(f: modfun.ModFun, g: modfun.ModFun):
    r = f.expr / g.expr
    if r.numer.is_ground and r.denom.is_ground:
        c = r.numer.LC / r.denom.LC
        return Fraction(int(c.numerator), int(c.denominator))
    return None


def _identify(f: modfun.ModFun, names) -> list:
    """Write f as a rational combination of at most two basis functions."""
    if f.is_zero():
        return []
    basis = [modfun.assembled(n) for n in names]
    for n, b in zip(names, basis):
        c = _as_const(f, b)
        if c is not None:
            return [(n, c)]
    if len(names) == 2:
        # solve at two generic points, rationalise, then confirm exactly
        pts = [(1.7, 0.45), (0.6, 2.3)]
        a = np.array([[float(modfun.evaluate(b, pt)) for b in basis] for pt in pts])
        rhs = np.array([float(modfun.evaluate(f, pt)) for pt in pts])
        sol = np.linalg.solve(a, rhs)
        cs = [Fraction(float(v)).limit_denominator(1000) for v in sol]
        combo = sum((b * c for b, c in zip(basis, cs)), modfun.ModFun(modfun.KF(0), 2))
        if modfun.normal_equal(combo, f):
            return [(n, c) for n, c in zip(names, cs) if c]
    raise UnmatchedTarget("slot function is not in the span of " + ", ".join(names))


def collect_to_basis(m: ModularExpr, half: str) -> ModularExpr:
    """Absorb Delta decorations into the functions and express each slot in the basis."""
    if half not in BASIS:
        raise ValueError(f"unknown half {half!r}")
    slots = slot_functions(m)
    out = ModularExpr(pi=m.pi)
    for (key, mono, part), fun in sorted(slots.items(), key=lambda kv: repr(kv[0])):
        names = BASIS[half][key[0]]
        for name, c in _identify(fun, names):
            unit = G_ONE if part == "re" else G_I
            coeff = ScalarPoly.mono(mono, unit * GaussRat(c))
            if key[0] == "two":
                app = Two(name, key[1], key[2])
            else:
                app = One(name, key[1])
            out.add(app, coeff)
    return out


def slot_functions(m: ModularExpr) -> dict:
    """Sum of decorated functions per (slot, tau monomial, real/imag part)."""
    slots: dict = {}
    for app, c in m.terms.items():
        key, fun = _slot(app)
        for mono, v in c.items():
            for part, val in (("re", v.re), ("im", v.im)):
                if val:
                    k2 = (key, mono, part)
                    slots[k2] = slots[k2] + fun * val if k2 in slots else fun * val
    return slots


def _target(kind: str, *bases) -> tuple:
    letters = tuple(ModWordLetter(Fraction(0), b) for b in bases)
    return (kind,) + letters


_D1, _D2 = DK(1, 0), DK(0, 1)
_KI, _KI2 = Kpow(-1), Kpow(-2)
# (basis name, slot target, tau monomial, part, sign)
ASSEMBLY = {
    FUNCTIONS: [
        ("f1", _target("one", (_KI, DK(2, 0))), _mono(), "re", 1),
        ("f2", _target("pair", (_KI2, _D1, _D1)), _mono(), "re", 1),
        ("F", _target("two", (_D1, _KI), (_KI, _D1)), _mono(), "re", 1),
    ],
    FORMS: [
        ("g1", _target("one", (_KI, DK(2, 0))), _mono(), "re", 1),
        ("g2", _target("pair", (_KI2, _D1, _D1)), _mono(), "re", 1),
        ("G", _target("two", (_D1, _KI), (_KI, _D1)), _mono(), "re", 1),
        ("L", _target("two", (_D1, _KI), (_KI, _D2)), _mono(t2=1), "im", -1),
    ],
}


def assemble_basis_functions(m: ModularExpr, half: str, register: bool = True) -> dict:
    """Read the basis functions off the radial output of one half.

    With ``register`` the results are stored as the assembled forms in modfun.
    """
    slots = slot_functions(m)
    out = {}
    for name, key, mono, part, sign in ASSEMBLY[half]:
        if (key, mono, part) not in slots:
            raise UnmatchedTarget(f"no slot for {name}")
        out[name] = slots[(key, mono, part)] * sign
        if register:
            modfun.register_assembled(name, out[name])
    return out


# ---------------------------------------------------------------- numeric evaluation

def _kappa(ma: MatrixAssignment):
    w, v = np.linalg.eigh((ma.k + ma.k.conj().T) / 2)
    return w, v


def letter_matrix(letter: ModWordLetter, ma: MatrixAssignment) -> np.ndarray:
    x = eval_word(letter.base, ma)
    n = int(2 * letter.q)
    if n == 0:
        return x
    return ma.kpow(-n) @ x @ ma.kpow(n)


def _fun_of(name: str) -> modfun.ModFun:
    e = modfun.entry(name)
    return e.assembled if e.assembled is not None else e.closed


def _letter_eig(letter: ModWordLetter, ma: MatrixAssignment, k2, V) -> np.ndarray:
    """Letter in the eigenbasis of k; Delta^q scales entry (i, j) by (k_j/k_i)^{2q}."""
    x = V.conj().T @ eval_word(letter.base, ma) @ V
    if letter.q:
        x = x * (k2[None, :] / k2[:, None]) ** float(letter.q)
    return x


def _one_table(name: str, k2, cfg, fast: bool) -> np.ndarray:
    f = _fun_of(name)
    n = len(k2)
    if fast:
        lk = np.log(k2)
        return _vectorized(f)(lk[None, :] - lk[:, None]).astype(complex)
    return np.array([[complex(modfun.evaluate(f, (k2[j] / k2[i],), cfg)) for j in range(n)] for i in range(n)])


def _two_table(name: str, k2, cfg, fast: bool) -> np.ndarray:
    f = _fun_of(name)
    n = len(k2)
    if fast:
        lk = np.log(k2)
        s = np.broadcast_to(lk[None, :, None] - lk[:, None, None], (n, n, n))
        t = np.broadcast_to(lk[None, None, :] - lk[None, :, None], (n, n, n))
        return _vectorized(f)(s, t).astype(complex)
    out = np.empty((n, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            for l in range(n):
                out[i, j, l] = complex(modfun.evaluate(f, (k2[j] / k2[i], k2[l] / k2[j]), cfg))
    return out


_VEC: dict = {}


def _vectorized(f: modfun.ModFun):
    key = (f.expr, f.arity, f.view)
    if key not in _VEC:
        _VEC[key] = modfun.vectorized(f)
    return _VEC[key]


def eval_modular(m: ModularExpr, ma: MatrixAssignment, cfg: modfun.EvalConfig = modfun.DEFAULT_CFG,
                 fast: bool = True) -> np.ndarray:
    """Matrix value with f(Delta) computed in the eigenbasis of k (pi factor not included).

    ``fast`` evaluates in floating point away from the singular lines; otherwise
    every value goes through the extended-precision path.
    """
    kap, V = _kappa(ma)
    k2 = kap ** 2
    n = len(kap)
    tables: dict = {}
    out = np.zeros((n, n), dtype=complex)
    for app, c in m.items():
        coef = ma.scalar(c)
        if app.fun not in tables:
            tables[app.fun] = (_one_table if isinstance(app, One) else _two_table)(app.fun, k2, cfg, fast)
        vals = tables[app.fun]
        if isinstance(app, One):
            x = _letter_eig(app.arg, ma, k2, V)
            out += coef * (V @ (vals * x) @ V.conj().T)
        else:
            x = _letter_eig(app.left, ma, k2, V)
            y = _letter_eig(app.right, ma, k2, V)
            z = np.einsum("ijl,ij,jl->il", vals, x, y)
            out += coef * (V @ z @ V.conj().T)
    return out


def pattern_matrix(sigma: int, p: int, pat: Pattern, ma: MatrixAssignment, u: float) -> np.ndarray:
    """The normalised pattern at a fixed u (b0 = (u k^2 + 1)^{-1})."""
    eye = np.eye(ma.dim)
    b = np.linalg.inv(u * ma.kpow(2) + eye)
    bp = lambda j: np.linalg.matrix_power(b, j)
    mid = ma.kpow(sigma) * u ** p
    if pat.two:
        return (bp(pat.j0) @ letter_matrix(pat.left, ma) @ mid @ bp(pat.j1)
                @ letter_matrix(pat.right, ma) @ b)
    return bp(pat.j0) @ mid @ letter_matrix(pat.left, ma) @ b


# ---------------------------------------------------------------- pipeline helpers

def angular_stage(b2: SymbolExpr) -> SymbolExpr:
    return angular_integrate(polar_substitute(b2))


def radial_stage(b2: SymbolExpr) -> ModularExpr:
    return radial_integrate(angular_stage(b2))


def grouped_stage(b2: SymbolExpr, half: str) -> ModularExpr:
    return collect_to_basis(radial_stage(b2), half)
