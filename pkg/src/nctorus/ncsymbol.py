"""Free noncommutative symbol algebra over the atoms k^n, d1^a d2^b(k) and b0^j.

b0 stands for (A2 + 1)^{-1} with A2 = Q(xi) k^2 the shared leading symbol, so
b0 commutes with k.  Words are kept canonical: adjacent k-powers and adjacent
b0-powers merge, and inside a run of {k, b0} atoms the b0-power comes first.

Because b0 and k commute only through the defining relation b0 (Q k^2 + 1) = 1,
derivation identities such as delta1 delta2 = delta2 delta1 hold word for word
on b0-free expressions and modulo that relation in general (see
b0_relation_zero).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.rings import ring

from .coeffring import (
    G_ONE,
    QFORM,
    T1,
    T2,
    X1,
    X2,
    GaussRat,
    ScalarPoly,
    mono_key,
    mono_text,
    P,
    parse_coeff,
    parse_mono_factor,
    poly_add,
    poly_eval,
    split_top,
)


class MixedDegree(ValueError):
    pass


class SingularB0(ArithmeticError):
    pass


@dataclass(frozen=True, slots=True)
class Kpow:
    n: int

    def __post_init__(self):
        if self.n == 0:
            raise ValueError("k^0 is the empty word")

    def text(self) -> str:
        return "k" if self.n == 1 else f"k^{self.n}"


@dataclass(frozen=True, slots=True)
class DK:
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise ValueError("derivative multi-index must be nonzero")

    def text(self) -> str:
        s = ""
        if self.a:
            s += "d1" if self.a == 1 else f"d1^{self.a}"
        if self.b:
            s += "d2" if self.b == 1 else f"d2^{self.b}"
        return s + "(k)"


@dataclass(frozen=True, slots=True)
class B0pow:
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("b0 power must be positive")

    def text(self) -> str:
        return "b0" if self.j == 1 else f"b0^{self.j}"


Atom = Union[Kpow, DK, B0pow]
Word = tuple
EMPTY: Word = ()

D1K = DK(1, 0)
D2K = DK(0, 1)


def canon(atoms: Iterable[Atom]) -> Word:
    """Merge runs of commuting k/b0 atoms; b0-power first inside each run."""
    out: list = []
    kk = bb = 0
    for at in atoms:
        if isinstance(at, Kpow):
            kk += at.n
        elif isinstance(at, B0pow):
            bb += at.j
        else:
            if bb:
                out.append(B0pow(bb))
            if kk:
                out.append(Kpow(kk))
            kk = bb = 0
            out.append(at)
    if bb:
        out.append(B0pow(bb))
    if kk:
        out.append(Kpow(kk))
    return tuple(out)


def concat(u: Word, w: Word) -> Word:
    if not u:
        return w
    if not w:
        return u
    if isinstance(u[-1], DK) or isinstance(w[0], DK):
        return u + w
    # only the junction needs merging
    i = len(u)
    while i > 0 and not isinstance(u[i - 1], DK):
        i -= 1
    j = 0
    while j < len(w) and not isinstance(w[j], DK):
        j += 1
    return u[:i] + canon(u[i:] + w[:j]) + w[j:]


def word_text(w: Word) -> str:
    return "*".join(a.text() for a in w) if w else "1"


def b0_power(w: Word) -> int:
    return sum(a.j for a in w if isinstance(a, B0pow))


def k_weight(w: Word) -> int:
    """Total k count; each derivative atom counts once."""
    return sum(a.n if isinstance(a, Kpow) else 1 for a in w if not isinstance(a, B0pow))


def word_key(w: Word):
    return (b0_power(w), len(w), word_text(w))


_ATOM = re.compile(r"^(?:k(?:\^(-?\d+))?|b0(?:\^(\d+))?|((?:d1(?:\^\d+)?)?(?:d2(?:\^\d+)?)?)\(k\))$")


def parse_atom(tok: str):
    m = _ATOM.match(tok.strip())
    if not m:
        return None
    s = tok.strip()
    if s.startswith("k"):
        return Kpow(int(m.group(1) or 1))
    if s.startswith("b0"):
        return B0pow(int(m.group(2) or 1))
    spec = m.group(3)
    a = b = 0
    for var, exp in re.findall(r"d([12])(?:\^(\d+))?", spec):
        if var == "1":
            a += int(exp or 1)
        else:
            b += int(exp or 1)
    return DK(a, b)


class SymbolExpr:
    """Immutable map Word -> ScalarPoly, zero entries absent."""

    __slots__ = ("_t",)

    def __init__(self, terms: Mapping[Word, ScalarPoly] | Iterable = ()):
        t: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for w, c in items:
            w = canon(w)
            if not isinstance(c, ScalarPoly):
                c = P(c)
            _acc(t, w, c)
        self._t = t

    @classmethod
    def _raw(cls, t: dict) -> "SymbolExpr":
        x = cls.__new__(cls)
        x._t = t
        return x

    @classmethod
    def word(cls, *atoms: Atom, coeff=1) -> "SymbolExpr":
        c = coeff if isinstance(coeff, ScalarPoly) else P(coeff)
        return cls._raw({canon(atoms): c} if c else {})

    @classmethod
    def scalar(cls, c) -> "SymbolExpr":
        return cls.word(coeff=c)

    @property
    def terms(self) -> dict:
        return self._t

    def items(self):
        return self._t.items()

    def __len__(self) -> int:
        return len(self._t)

    def n_terms(self) -> int:
        return sum(len(c) for c in self._t.values())

    def __bool__(self) -> bool:
        return bool(self._t)

    def __eq__(self, o) -> bool:
        if not isinstance(o, SymbolExpr):
            return NotImplemented
        return self._t == o._t

    def __hash__(self):
        return hash(frozenset(self._t.items()))

    def __add__(self, o: "SymbolExpr") -> "SymbolExpr":
        t = dict(self._t)
        for w, c in o._t.items():
            _acc(t, w, c)
        return SymbolExpr._raw(t)

    def __neg__(self) -> "SymbolExpr":
        return SymbolExpr._raw({w: -c for w, c in self._t.items()})

    def __sub__(self, o: "SymbolExpr") -> "SymbolExpr":
        return self + (-o)

    def __mul__(self, o) -> "SymbolExpr":
        if isinstance(o, SymbolExpr):
            return nc_mul(self, o)
        return self.scale(o)

    def __rmul__(self, o) -> "SymbolExpr":
        return self.scale(o)

    def scale(self, c) -> "SymbolExpr":
        if not isinstance(c, ScalarPoly):
            c = P(c)
        if not c:
            return SymbolExpr._raw({})
        t = {}
        for w, v in self._t.items():
            p = v * c
            if p:
                t[w] = p
        return SymbolExpr._raw(t)

    def coeff(self, w: Iterable[Atom]) -> ScalarPoly:
        return self._t.get(canon(w), ScalarPoly._raw({}))

    def sorted_terms(self):
        """(word, mono, coeff) triples in printing order."""
        out = []
        for w in sorted(self._t, key=word_key):
            for m, c in self._t[w].sorted_items():
                out.append((w, m, c))
        return out

    def text(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for w, m, c in self.sorted_terms():
            s = c.text()
            mt = mono_text(m)
            if mt:
                s += "*" + mt
            if w:
                s += "*" + word_text(w)
            parts.append(s)
        return " + ".join(parts)

    def records(self) -> list:
        return [{"coeff": c.text(), "monomial": mono_text(m) or "1", "word": word_text(w)}
                for w, m, c in self.sorted_terms()]

    def __repr__(self) -> str:
        return f"SymbolExpr({self.text()})"

    def map_coeffs(self, f) -> "SymbolExpr":
        t = {}
        for w, c in self._t.items():
            _acc(t, w, f(c))
        return SymbolExpr._raw(t)

    def filter_words(self, pred) -> "SymbolExpr":
        return SymbolExpr._raw({w: c for w, c in self._t.items() if pred(w)})


def _acc(t: dict, w: Word, c: ScalarPoly) -> None:
    if not c:
        return
    if w in t:
        s = poly_add(t[w], c)
        if s:
            t[w] = s
        else:
            del t[w]
    else:
        t[w] = c


def zero() -> SymbolExpr:
    return SymbolExpr._raw({})


def one() -> SymbolExpr:
    return SymbolExpr.word()


def from_terms(items: Iterable) -> SymbolExpr:
    """Build from (word, ScalarPoly) pairs whose words are canonical."""
    t: dict = {}
    for w, c in items:
        _acc(t, w, c)
    return SymbolExpr._raw(t)


def nc_mul(x: SymbolExpr, y: SymbolExpr) -> SymbolExpr:
    t: dict = {}
    for u, cu in x._t.items():
        for w, cw in y._t.items():
            _acc(t, concat(u, w), cu * cw)
    return SymbolExpr._raw(t)


def nc_prod(*xs: SymbolExpr) -> SymbolExpr:
    out = xs[0]
    for x in xs[1:]:
        out = nc_mul(out, x)
    return out


def _dk(j: int) -> DK:
    return D1K if j == 1 else D2K


def _kdk(a: int, d: DK, b: int) -> Word:
    return tuple(([Kpow(a)] if a else []) + [d] + ([Kpow(b)] if b else []))


def _delta_atom(j: int, at: Atom) -> list:
    """(coeff, word) list for delta_j of a single atom."""
    if isinstance(at, DK):
        return [(None, (DK(at.a + 1, at.b) if j == 1 else DK(at.a, at.b + 1),))]
    d = _dk(j)
    if isinstance(at, Kpow):
        n = at.n
        out = []
        if n > 0:
            for i in range(n):
                out.append((None, _kdk(i, d, n - 1 - i)))
        else:
            m = -n
            for i in range(m):
                out.append((P(-1), _kdk(i - m, d, -1 - i)))
        return out
    # b0^m: sum_i b0^i (-Q b0 (k d + d k) b0) b0^{m-1-i}
    m = at.j
    out = []
    mq = -QFORM
    for i in range(m):
        left = B0pow(i + 1)
        right = B0pow(m - i)
        out.append((mq, (left, Kpow(1), d, right)))
        out.append((mq, (left, d, Kpow(1), right)))
    return out


_DELTA_CACHE: dict = {}


def _delta_word(j: int, w: Word) -> list:
    key = (j, w)
    hit = _DELTA_CACHE.get(key)
    if hit is not None:
        return hit
    out = []
    for i, at in enumerate(w):
        pre, post = w[:i], w[i + 1:]
        for c, dw in _delta_atom(j, at):
            out.append((c, concat(concat(pre, canon(dw)), post)))
    if len(_DELTA_CACHE) < 200000:
        _DELTA_CACHE[key] = out
    return out


def delta(j: int, x: SymbolExpr) -> SymbolExpr:
    """The derivation delta_j, extended by the Leibniz rule."""
    if j not in (1, 2):
        raise ValueError("j must be 1 or 2")
    t: dict = {}
    for w, c in x._t.items():
        for dc, dw in _delta_word(j, w):
            _acc(t, dw, c if dc is None else c * dc)
    return SymbolExpr._raw(t)


def delta_multi(x: SymbolExpr, a: int, b: int) -> SymbolExpr:
    for _ in range(a):
        x = delta(1, x)
    for _ in range(b):
        x = delta(2, x)
    return x


DQ = {1: QFORM.diff(X1), 2: QFORM.diff(X2)}


def dxi(i: int, x: SymbolExpr) -> SymbolExpr:
    """Partial derivative in xi_i; d(b0^m) = -m dQ b0^{m+1} k^2."""
    if i not in (1, 2):
        raise ValueError("i must be 1 or 2")
    var = X1 if i == 1 else X2
    dq = DQ[i]
    t: dict = {}
    for w, c in x._t.items():
        _acc(t, w, c.diff(var))
        for pos, at in enumerate(w):
            if isinstance(at, B0pow):
                nw = concat(concat(w[:pos], (B0pow(at.j + 1), Kpow(2))), w[pos + 1:])
                _acc(t, nw, c * dq.scale(-at.j))
    return SymbolExpr._raw(t)


def dxi_multi(x: SymbolExpr, a: int, b: int) -> SymbolExpr:
    for _ in range(a):
        x = dxi(1, x)
    for _ in range(b):
        x = dxi(2, x)
    return x


def star(x: SymbolExpr) -> SymbolExpr:
    """Involution: reverse words, flip odd derivatives, conjugate coefficients."""
    t: dict = {}
    for w, c in x._t.items():
        sign = 1
        for at in w:
            if isinstance(at, DK) and (at.a + at.b) % 2:
                sign = -sign
        cc = c.conj()
        _acc(t, canon(reversed(w)), cc if sign > 0 else -cc)
    return SymbolExpr._raw(t)


def order_of(word: Word, coeff: ScalarPoly | tuple) -> int:
    """xi-degree minus twice the total b0 power."""
    if isinstance(coeff, tuple):
        degs = {coeff[X1] + coeff[X2]}
    else:
        degs = coeff.xi_degrees()
    if len(degs) != 1:
        raise MixedDegree(f"coefficient of {word_text(word)} is not xi-homogeneous")
    return degs.pop() - 2 * b0_power(word)


def extract_order(x: SymbolExpr, n: int) -> SymbolExpr:
    t: dict = {}
    for w, c in x._t.items():
        bp = 2 * b0_power(w)
        keep = {m: v for m, v in c.items() if m[X1] + m[X2] - bp == n}
        if keep:
            t[w] = ScalarPoly._raw(keep)
    return SymbolExpr._raw(t)


def orders(x: SymbolExpr) -> set:
    out = set()
    for w, c in x._t.items():
        bp = 2 * b0_power(w)
        out |= {d - bp for d in c.xi_degrees()}
    return out


def atoms_of(x: SymbolExpr) -> set:
    return {a for w in x._t for a in w}


# ---------------------------------------------------------------- b0 relation

def divide_by_q(c: ScalarPoly):
    """c = q*Q + rem with rem of xi1-degree <= 1 (leading term xi1^2)."""
    rem = dict(c.terms)
    quo: dict = {}
    qt = QFORM.terms
    while True:
        tops = [m for m in rem if m[X1] >= 2]
        if not tops:
            break
        m = max(tops, key=lambda e: (e[X1], e))
        cf = rem[m]
        qm = (m[0] - 2,) + m[1:]
        quo[qm] = quo.get(qm, GaussRat.of(0)) + cf
        for qmono, qc in qt.items():
            mm = tuple(a + b for a, b in zip(qm, qmono))
            v = rem.get(mm, GaussRat.of(0)) - cf * qc
            if v:
                rem[mm] = v
            else:
                rem.pop(mm, None)
    return ScalarPoly(quo), ScalarPoly._raw(rem)


def b0_reduce(x: SymbolExpr, max_rounds: int = 64) -> SymbolExpr:
    """Apply Q b0^j k^n = b0^{j-1} k^{n-2} - b0^j k^{n-2} (j >= 1, n >= 2).

    The rightmost eligible block of each word absorbs the Q-divisible part of
    its coefficient.  Used for display; exact zero tests use b0_relation_zero.
    """
    cur = x
    for _ in range(max_rounds):
        changed = False
        terms = []
        for w, c in cur.items():
            pos = None
            for i in range(len(w) - 1, -1, -1):
                at = w[i]
                if isinstance(at, B0pow) and i + 1 < len(w) and isinstance(w[i + 1], Kpow) and w[i + 1].n >= 2:
                    pos = i
                    break
            if pos is None:
                terms.append((w, c))
                continue
            q, rem = divide_by_q(c)
            if not q:
                terms.append((w, c))
                continue
            changed = True
            if rem:
                terms.append((w, rem))
            j, n = w[pos].j, w[pos + 1].n
            pre, post = w[:pos], w[pos + 2:]
            blk1 = tuple(a for a in ((B0pow(j - 1) if j > 1 else None), (Kpow(n - 2) if n > 2 else None)) if a)
            blk2 = tuple(a for a in (B0pow(j), (Kpow(n - 2) if n > 2 else None)) if a)
            terms.append((concat(concat(pre, blk1), post), q))
            terms.append((concat(concat(pre, blk2), post), -q))
        cur = from_terms(terms)
        if not changed:
            return cur
    return cur


def _skeleton(w):
    """Split a word into (derivative atoms, [(b0 power, k power)] blocks)."""
    dks, blocks = [], []
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
    return tuple(dks), blocks


def b0_relation_zero(x: SymbolExpr) -> bool:
    """Exact test of x == 0 modulo b0 (Q k^2 + 1) = 1.

    Each block between derivative atoms is a rational function of k, so a
    word with m derivative atoms maps into rational functions of m+1 commuting
    copies k_0..k_m; the tensor product embeds, which makes the test exact.
    """
    groups: dict = {}
    for w, c in x.items():
        sk, blocks = _skeleton(w)
        groups.setdefault(sk, []).append((tuple(blocks), c))
    for sk, items in groups.items():
        m = len(sk) + 1
        names = ["x1", "x2", "r", "t1", "t2"] + [f"k{i}" for i in range(m)]
        R, *gens = ring(",".join(names), QQ)
        ks = gens[5:]
        qf = _to_ring(QFORM, R, m, 0, "re")
        jmax = [max(b[i][0] for b, _ in items) for i in range(m)]
        nmin = [min(b[i][1] for b, _ in items) for i in range(m)]
        t2min = min(min(mm[4] for mm in c.terms) for _, c in items)
        shift = -t2min if t2min < 0 else 0
        pw = [[R.one] for _ in range(m)]
        base = [qf * ks[i] ** 2 + 1 for i in range(m)]
        for i in range(m):
            for _ in range(jmax[i]):
                pw[i].append(pw[i][-1] * base[i])
        total_re, total_im = R.zero, R.zero
        for blocks, c in items:
            fac = R.one
            for i, (j, n) in enumerate(blocks):
                fac *= ks[i] ** (n - nmin[i]) * pw[i][jmax[i] - j]
            re = _to_ring(c, R, m, shift, "re")
            im = _to_ring(c, R, m, shift, "im")
            if re:
                total_re += re * fac
            if im:
                total_im += im * fac
        if total_re or total_im:
            return False
    return True


def _to_ring(p: ScalarPoly, R, m: int, t2shift: int, part: str):
    d = {}
    pad = (0,) * m
    for mono, c in p.items():
        v = getattr(c, part)
        if v:
            d[mono[:4] + (mono[4] + t2shift,) + pad] = QQ(v.numerator, v.denominator)
    return R.from_dict(d) if d else R.zero



def equal_mod_b0(x: SymbolExpr, y: SymbolExpr) -> bool:
    return x == y or b0_relation_zero(x - y)


# ---------------------------------------------------------------- parsing

def parse_expr(text: str) -> SymbolExpr:
    """Parse ``coeff*monomial*word`` terms joined by `` + ``."""
    text = " ".join(text.split())
    if text in ("", "0"):
        return zero()
    t: dict = {}
    for tok in split_top(text, " + "):
        c = GaussRat.of(1)
        e = [0, 0, 0, 0, 0]
        atoms = []
        for f in split_top(tok, "*"):
            if f == "1":
                continue
            if f.startswith("("):
                c = c * parse_coeff(f)
                continue
            mf = parse_mono_factor(f)
            if mf is not None:
                e[mf[0]] += mf[1]
                continue
            at = parse_atom(f)
            if at is None:
                raise ValueError(f"bad factor {f!r} in {tok!r}")
            atoms.append(at)
        _acc(t, canon(atoms), ScalarPoly.mono(tuple(e), c))
    return SymbolExpr._raw(t)


# ---------------------------------------------------------------- matrix oracle

@dataclass
class MatrixAssignment:
    """Numeric substitution of every atom and scalar by matrices and numbers.

    ``polar`` switches b0 to (r^2 k^2 + 1)^{-1}; otherwise the quadratic form is
    evaluated at the assigned xi and tau values.
    """

    k: np.ndarray
    dk: dict
    scalars: dict
    polar: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.k.shape[0]

    def kpow(self, n: int) -> np.ndarray:
        key = ("k", n)
        if key not in self._cache:
            if n > 0:
                self._cache[key] = np.linalg.matrix_power(self.k, n)
            else:
                self._cache[key] = np.linalg.matrix_power(np.linalg.inv(self.k), -n)
        return self._cache[key]

    def qvalue(self) -> complex:
        if self.polar:
            return complex(self.scalars["r"]) ** 2
        return complex(poly_eval(QFORM, self.scalars, 20))

    def b0(self) -> np.ndarray:
        if "b0" not in self._cache:
            a = self.qvalue() * self.kpow(2) + np.eye(self.dim)
            if np.linalg.cond(a) > 1e12:
                raise SingularB0("A2 + 1 is numerically singular")
            self._cache["b0"] = np.linalg.inv(a)
        return self._cache["b0"]

    def atom(self, at: Atom) -> np.ndarray:
        if isinstance(at, Kpow):
            return self.kpow(at.n)
        if isinstance(at, DK):
            return self.dk[(at.a, at.b)]
        key = ("b0", at.j)
        if key not in self._cache:
            self._cache[key] = np.linalg.matrix_power(self.b0(), at.j)
        return self._cache[key]

    def scalar(self, p: ScalarPoly) -> complex:
        return complex(poly_eval(p, self.scalars, 20))


def eval_word(w: Word, m: MatrixAssignment) -> np.ndarray:
    out = np.eye(m.dim, dtype=complex)
    for at in w:
        out = out @ m.atom(at)
    return out


def eval_matrix(x: SymbolExpr, m: MatrixAssignment) -> np.ndarray:
    out = np.zeros((m.dim, m.dim), dtype=complex)
    for w, c in x._t.items():
        out = out + m.scalar(c) * eval_word(w, m)
    return out


def commuting_derivations(dim: int, rng: np.random.Generator):
    """Two commuting Hermitian generators; delta_j(x) = [D_j, x] is a derivation."""
    d1 = np.diag(rng.uniform(-1, 1, dim))
    d2 = np.diag(rng.uniform(-1, 1, dim))
    return d1, d2


def random_assignment(rng: np.random.Generator, dim: int = 4, max_order: int = 4,
                      polar: bool = False, scalars: dict | None = None) -> MatrixAssignment:
    """Positive k and derivative atoms given by iterated inner derivations.

    With this choice delta_j on symbols matches the commutator [D_j, .] on
    matrices, so derivation rules can be checked numerically.
    """
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (a + a.conj().T) / 4
    w, v = np.linalg.eigh(h)
    k = (v * np.exp(w / 2)) @ v.conj().T
    d1, d2 = commuting_derivations(dim, rng)
    dk = {}
    for s in range(1, max_order + 1):
        for aa in range(s + 1):
            bb = s - aa
            x = k
            for _ in range(aa):
                x = d1 @ x - x @ d1
            for _ in range(bb):
                x = d2 @ x - x @ d2
            dk[(aa, bb)] = x
    if scalars is None:
        scalars = {
            "x1": rng.uniform(-1.5, 1.5),
            "x2": rng.uniform(-1.5, 1.5),
            "t1": rng.uniform(-1, 1),
            "t2": rng.uniform(0.5, 2),
            "r": rng.uniform(0.2, 2),
        }
    m = MatrixAssignment(k=k, dk=dk, scalars=dict(scalars), polar=polar)
    m._cache["D"] = (d1, d2)
    return m


def matrix_delta(j: int, mat: np.ndarray, m: MatrixAssignment) -> np.ndarray:
    d = m._cache["D"][j - 1]
    return d @ mat - mat @ d


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)


def factorial(n: int) -> int:
    return math.factorial(n)
