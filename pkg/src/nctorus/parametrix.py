"""Operator symbols of the two Laplacian halves and the resolvent parametrix.

The spectral parameter is fixed at lambda = -1, so b0 = (A2 + 1)^{-1} is the
primitive b0 atom.  The recursion for b1 and b2 follows the composition rule
term by term.
"""

from __future__ import annotations

import math
from importlib import resources
from dataclasses import dataclass, field
from fractions import Fraction

from .coeffring import (
    ABS_TAU2,
    QFORM,
    TAU,
    TAU1,
    TAUBAR,
    XI1,
    XI2,
    ScalarPoly,
    P,
)
from .ncsymbol import (
    DK,
    B0pow,
    Kpow,
    SymbolExpr,
    b0_power,
    b0_reduce,
    b0_relation_zero,
    concat,
    delta,
    delta_multi,
    dxi,
    dxi_multi,
    extract_order,
    from_terms,
    nc_mul,
    nc_prod,
    one,
    orders,
    parse_expr,
    star,
    zero,
)

FUNCTIONS = "functions"
FORMS = "forms"
HALVES = (FUNCTIONS, FORMS)


def W(*atoms, coeff=1) -> SymbolExpr:
    return SymbolExpr.word(*atoms, coeff=coeff)


K1 = Kpow(1)
K2 = Kpow(2)
D1 = DK(1, 0)
D2 = DK(0, 1)
B0 = W(B0pow(1))
A2 = W(K2, coeff=QFORM)


@dataclass(frozen=True)
class OperatorSymbol:
    a2: SymbolExpr
    a1: SymbolExpr
    a0: SymbolExpr
    tag: str


@dataclass(frozen=True)
class ParametrixTerms:
    b0: SymbolExpr
    b1: SymbolExpr
    b2: SymbolExpr


def dk2(j: int) -> SymbolExpr:
    """delta_j(k^2), stored expanded."""
    d = D1 if j == 1 else D2
    return W(K1, d) + W(d, K1)


def symbol_functions() -> OperatorSymbol:
    a1 = (W(K1, D1, coeff=P(2) * XI1) + W(K1, D2, coeff=P(2) * ABS_TAU2 * XI2)
          + W(K1, D2, coeff=P(2) * TAU1 * XI1) + W(K1, D1, coeff=P(2) * TAU1 * XI2))
    a0 = W(K1, DK(2, 0)) + W(K1, DK(0, 2), coeff=ABS_TAU2) + W(K1, DK(1, 1), coeff=P(2) * TAU1)
    return OperatorSymbol(A2, a1, a0, FUNCTIONS)


def symbol_forms() -> OperatorSymbol:
    c1 = ((dk2(1) + dk2(2).scale(TAU)).scale(XI1)
          + (dk2(1).scale(TAUBAR) + dk2(2).scale(ABS_TAU2)).scale(XI2))
    return OperatorSymbol(A2, c1, zero(), FORMS)


def operator_symbol(half: str) -> OperatorSymbol:
    if half == FUNCTIONS:
        return symbol_functions()
    if half == FORMS:
        return symbol_forms()
    raise ValueError(f"unknown half {half!r}")


def sigma_d() -> SymbolExpr:
    """Symbol of the d-bar operator delta1 + conj(tau) delta2."""
    return W(coeff=XI1 + TAUBAR * XI2)


def sigma_d_adjoint() -> SymbolExpr:
    return W(coeff=XI1 + TAU * XI2)


def _min_max_order(x: SymbolExpr):
    o = orders(x)
    return (min(o), max(o)) if o else (0, 0)


def compose_symbols(x: SymbolExpr, y: SymbolExpr, min_order: int) -> SymbolExpr:
    """sum_l 1/(l1! l2!) d_xi^l(x) delta^l(y), keeping terms of order >= min_order."""
    if not x or not y:
        return zero()
    top = _min_max_order(x)[1] + _min_max_order(y)[1]
    out = zero()
    for s in range(0, top - min_order + 1):
        for l1 in range(s + 1):
            l2 = s - l1
            dx = dxi_multi(x, l1, l2)
            if not dx:
                continue
            dy = delta_multi(y, l1, l2)
            if not dy:
                continue
            term = nc_mul(dx, dy)
            w = math.factorial(l1) * math.factorial(l2)
            out = out + (term if w == 1 else term.scale(Fraction(1, w)))
    keep = {}
    for wd, c in out.items():
        bp = 2 * b0_power(wd)
        sub = {m: v for m, v in c.items() if m[0] + m[1] - bp >= min_order}
        if sub:
            keep[wd] = ScalarPoly._raw(sub)
    return SymbolExpr._raw(keep)


def adjoint_symbol(x: SymbolExpr, max_terms: int = 32) -> SymbolExpr:
    """sum_l 1/(l1! l2!) d_xi^l delta^l (x*); x must be polynomial in xi."""
    if any(b0_power(w) for w in x.terms):
        raise ValueError("adjoint expansion needs a symbol polynomial in xi")
    base = star(x)
    out = zero()
    for s in range(max_terms):
        layer = zero()
        for l1 in range(s + 1):
            l2 = s - l1
            t = dxi_multi(base, l1, l2)
            if not t:
                continue
            t = delta_multi(t, l1, l2)
            w = math.factorial(l1) * math.factorial(l2)
            layer = layer + (t if w == 1 else t.scale(Fraction(1, w)))
        if not layer and s > 0 and all(not dxi_multi(base, a, s - a) for a in range(s + 1)):
            return out
        out = out + layer
    raise ValueError("adjoint expansion did not terminate")


def compute_parametrix(op: OperatorSymbol) -> ParametrixTerms:
    if op.a2 != A2:
        raise ValueError("leading symbol must be the shared A2")
    a2, a1, a0 = op.a2, op.a1, op.a0
    b0 = B0
    d1a2, d2a2 = delta(1, a2), delta(2, a2)
    d1b0, d2b0 = dxi(1, b0), dxi(2, b0)
    b1 = -(nc_prod(b0, a1, b0) + nc_prod(d1b0, d1a2, b0) + nc_prod(d2b0, d2a2, b0))
    half = Fraction(1, 2)
    parts = [
        nc_prod(b0, a0, b0),
        nc_prod(b1, a1, b0),
        nc_prod(d1b0, delta(1, a1), b0),
        nc_prod(d2b0, delta(2, a1), b0),
        nc_prod(dxi(1, b1), d1a2, b0),
        nc_prod(dxi(2, b1), d2a2, b0),
        nc_prod(dxi(1, d1b0), delta(1, d1a2), b0).scale(half),
        nc_prod(dxi(2, d2b0), delta(2, d2a2), b0).scale(half),
        nc_prod(dxi(2, d1b0), delta(2, d1a2), b0),
    ]
    acc = zero()
    for p in parts:
        acc = acc + p
    return ParametrixTerms(b0, b1, -acc)


@dataclass
class ResidualReport:
    half: str
    orders: dict = field(default_factory=dict)  # order -> (expected, ok, nonzero residual text)

    @property
    def ok(self) -> bool:
        return all(v[1] for v in self.orders.values())


def composed_by_order(p: ParametrixTerms, op: OperatorSymbol, targets=(0, -1, -2)) -> dict:
    """Graded pieces of (b0 + b1 + b2) o ((a2 + 1) + a1 + a0); 1 counts as order 2."""
    bs = {-2: p.b0, -3: p.b1, -4: p.b2}
    a_s = {2: op.a2 + one(), 1: op.a1, 0: op.a0}
    out = {n: zero() for n in targets}
    for ob, b in bs.items():
        for oa, a in a_s.items():
            for s in range(0, 3):
                n = ob + oa - s
                if n not in out:
                    continue
                for l1 in range(s + 1):
                    l2 = s - l1
                    db = dxi_multi(b, l1, l2)
                    if not db:
                        continue
                    da = delta_multi(a, l1, l2)
                    if not da:
                        continue
                    t = nc_mul(db, da)
                    w = math.factorial(l1) * math.factorial(l2)
                    out[n] = out[n] + (t if w == 1 else t.scale(Fraction(1, w)))
    return out


def verify_parametrix(p: ParametrixTerms, op: OperatorSymbol) -> ResidualReport:
    rep = ResidualReport(op.tag)
    pieces = composed_by_order(p, op)
    for n, x in pieces.items():
        expected = one() if n == 0 else zero()
        diff = x - expected
        ok = b0_relation_zero(diff)
        rep.orders[n] = (1 if n == 0 else 0, ok, "" if ok else b0_reduce(diff).text())
    return rep


_CACHE: dict = {}


def parametrix_for(half: str) -> ParametrixTerms:
    if half not in _CACHE:
        _CACHE[half] = compute_parametrix(operator_symbol(half))
    return _CACHE[half]


def check_orders(p: ParametrixTerms) -> dict:
    return {"b0": orders(p.b0), "b1": orders(p.b1), "b2": orders(p.b2)}


def group_k2(x: SymbolExpr) -> str:
    """Display with k d(k) + d(k) k pairs regrouped as d(k^2) where possible."""
    pending = dict(x.terms)
    out = []

    def k_first(w):
        for i in range(len(w) - 1):
            a, b = w[i], w[i + 1]
            if isinstance(a, Kpow) and a.n >= 1 and isinstance(b, DK) and b.a + b.b == 1:
                yield i

    for w in sorted(pending, key=lambda w: (not any(True for _ in k_first(w)), str(w))):
        if w not in pending:
            continue
        c = pending.pop(w)
        for i in k_first(w):
            a, d = w[i], w[i + 1]
            pre = w[:i] + ((Kpow(a.n - 1),) if a.n > 1 else ())
            post = w[i + 2:]
            partner = concat(concat(pre, (d, K1)), post)
            if pending.get(partner) == c:
                del pending[partner]
                name = "d1(k^2)" if d.a else "d2(k^2)"
                body = [t.text() for t in pre] + [name] + [t.text() for t in post]
                out.append(f"[{c.text()}]*{'*'.join(body)}")
                break
        else:
            out.append(f"[{c.text()}]*{'*'.join(t.text() for t in w) or '1'}")
    return " + ".join(out) if out else "0"


GOLDEN_FILES = {FUNCTIONS: "golden_functions_b2.txt", FORMS: "golden_forms_b2.txt"}


def golden_terms(half: str) -> list:
    """Transcribed reference terms of b2, one SymbolExpr per term."""
    text = resources.files("nctorus").joinpath("data", GOLDEN_FILES[half]).read_text()
    return [parse_expr(s) for s in text.splitlines() if s.strip()]


def spot_check(half: str) -> list:
    """Compare every transcribed term with the computed b2."""
    b2 = parametrix_for(half).b2
    out = []
    for t in golden_terms(half):
        (w, c), = t.items()
        (m, v), = c.items()
        got = b2.coeff(w).terms.get(m)
        out.append({
            "term": t.text(),
            "expected": v.text() if hasattr(v, "text") else str(v),
            "actual": "0" if got is None else (got.text() if hasattr(got, "text") else str(got)),
            "match": got == v,
        })
    return out
