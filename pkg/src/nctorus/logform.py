"""Rewrite the grouped k-derivative basis in terms of log k and assemble the curvature.

With k = e^{h/2} and Delta = k^{-2} . k^2, the identities used are

    k^{-1} d_i(k)             = 2 (Delta^{1/2} - 1)/log Delta (d_i log k)
    d_i(k) k^{-1}             = -2 (Delta^{-1/2} - 1)/log Delta (d_i log k)
    k^{-2} d_i(k) d_j(k)      = 4 (Delta - Delta^{1/2})/log Delta (d_i log k) . (Delta^{1/2} - 1)/log Delta (d_j log k)
    k^{-1} d_i d_j(k)         = 2 (Delta^{1/2} - 1)/log Delta (d_i d_j log k)
                                + g(Delta_1, Delta_2)(d_j log k . d_i log k + d_i log k . d_j log k)

Functions of Delta become functions of s = log Delta (t for the second factor).
The overall factor -1 of the curvature recipe is applied here, once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import modfun
from .coeffring import T1, T2, ScalarPoly
from .modfun import ST, KF, LU, LV, X, Y, ModFun
from .reduce import ModularExpr, One, Two, UnmatchedTarget

LIN = "lin"
BIL = "bil"

_ONE = (0, 0, 0, 0, 0)
_T1 = tuple(1 if i == T1 else 0 for i in range(5))
_T2 = tuple(1 if i == T2 else 0 for i in range(5))
_T1SQ = tuple(2 if i == T1 else 0 for i in range(5))
_T2SQ = tuple(2 if i == T2 else 0 for i in range(5))


def target_text(t) -> str:
    kind, i, j = t
    if kind == LIN:
        return "d1^2(log k)" if (i, j) == (1, 1) else "d2^2(log k)" if (i, j) == (2, 2) else "d1d2(log k)"
    return f"d{i}(log k)*d{j}(log k)"


@dataclass
class LogBasisExpr:
    """Map (target, tau monomial, 're'|'im') -> function in the exponential view."""

    terms: dict = field(default_factory=dict)
    prefactor: str = "-pi/tau2"

    def add(self, target, mono, part, f: ModFun) -> None:
        key = (target, mono, part)
        s = self.terms[key] + f if key in self.terms else f
        if s.is_zero():
            self.terms.pop(key, None)
        else:
            self.terms[key] = s

    def get(self, target, mono, part="re") -> ModFun:
        return self.terms.get((target, mono, part), ModFun(KF(0), 2 if target[0] == BIL else 1, ST))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def combine(self, other: "LogBasisExpr", sign: int) -> "LogBasisExpr":
        out = LogBasisExpr(dict(self.terms), self.prefactor)
        for (t, m, p), f in other.terms.items():
            out.add(t, m, p, f * sign)
        return out

    def decompose(self) -> dict:
        """Split into the shapes
            A(x) (d1^2 + |tau|^2 d2^2 + 2 tau1 d1d2)(log k)
            + B(s,t) (d1 d1 + |tau|^2 d2 d2 + tau1 (d1 d2 + d2 d1))
            - i tau2 C(s,t) (d1 d2 - d2 d1)
        and check that nothing else is present.  Returns {"linear", "bilinear", "antisym"}.
        """
        lin = self.get((LIN, 1, 1), _ONE)
        bil = self.get((BIL, 1, 1), _ONE)
        anti = -self.get((BIL, 1, 2), _T2, "im")
        expected = {
            ((LIN, 1, 1), _ONE, "re"): lin,
            ((LIN, 2, 2), _T1SQ, "re"): lin,
            ((LIN, 2, 2), _T2SQ, "re"): lin,
            ((LIN, 1, 2), _T1, "re"): lin * 2,
            ((BIL, 1, 1), _ONE, "re"): bil,
            ((BIL, 2, 2), _T1SQ, "re"): bil,
            ((BIL, 2, 2), _T2SQ, "re"): bil,
            ((BIL, 1, 2), _T1, "re"): bil,
            ((BIL, 2, 1), _T1, "re"): bil,
            ((BIL, 1, 2), _T2, "im"): -anti,
            ((BIL, 2, 1), _T2, "im"): anti,
        }
        for key, f in expected.items():
            got = self.terms.get(key)
            if got is None:
                if not f.is_zero():
                    raise UnmatchedTarget(f"missing {target_text(key[0])} at {key[1:]}")
            elif not modfun.normal_equal(got, f):
                raise UnmatchedTarget(f"coefficient ratio broken at {target_text(key[0])} {key[1:]}")
        extra = set(self.terms) - set(expected)
        if extra:
            raise UnmatchedTarget(f"unexpected targets: {sorted(map(str, extra))}")
        return {"linear": lin, "bilinear": bil, "antisym": anti}

    def records(self) -> list:
        out = []
        for (t, m, p), f in sorted(self.terms.items(), key=lambda kv: repr(kv[0])):
            c = ScalarPoly.mono(m, 1 if p == "re" else complex(0, 1))
            out.append({"target": target_text(t), "coeff": c.text(), "function": f.text()})
        return out


# functions in the exponential view
def _a_x() -> ModFun:
    return ModFun((X - 1) / LU, 1, ST)  # (e^{x/2} - 1)/x


def _b_s() -> ModFun:
    return ModFun((X ** 2 - X) / LU, 2, ST)  # (e^s - e^{s/2})/s


def _c_s() -> ModFun:
    return ModFun((X ** -1 - 1) / LU, 2, ST)  # (e^{-s/2} - 1)/s


def _d_t() -> ModFun:
    return ModFun((Y - 1) / LV, 2, ST)  # (e^{t/2} - 1)/t


def _dk_pair(d) -> tuple:
    """d_i d_j(k) -> (i, j) with d1 before d2."""
    if d.a == 2:
        return 1, 1
    if d.b == 2:
        return 2, 2
    if d.a == 1 and d.b == 1:
        return 1, 2
    raise UnmatchedTarget(f"{d.text()} is not a second derivative")


def _first(d) -> int:
    if d.a + d.b != 1:
        raise UnmatchedTarget(f"{d.text()} is not a first derivative")
    return 1 if d.a else 2


def _fun_st(name: str) -> ModFun:
    return modfun.exp_view(modfun.assembled(name))


def k_to_log(x: ModularExpr) -> LogBasisExpr:
    out = LogBasisExpr()
    g = _fun_st("g")
    for app, c in x.terms.items():
        contributions = []  # (target, ModFun)
        if isinstance(app, One):
            f = _fun_st(app.fun) * modfun.monomial(app.arg.q, view=ST)
            base = app.arg.base
            if len(base) == 2:
                i, j = _dk_pair(base[1])
                contributions.append(((LIN, i, j), f * _a_x() * 2))
                fs = modfun.at_sum(f)
                if i == j:
                    contributions.append(((BIL, i, i), fs * g * 2))
                else:
                    contributions.append(((BIL, j, i), fs * g))
                    contributions.append(((BIL, i, j), fs * g))
            else:
                i, j = _first(base[1]), _first(base[2])
                contributions.append(((BIL, i, j), modfun.at_sum(f) * _b_s() * _d_t() * 4))
        elif isinstance(app, Two):
            f = _fun_st(app.fun) * modfun.monomial(app.left.q, app.right.q, view=ST)
            i, j = _first(app.left.base[0]), _first(app.right.base[1])
            contributions.append(((BIL, i, j), f * _c_s() * _d_t() * (-4)))
        else:
            raise UnmatchedTarget(repr(app))
        for mono, v in c.items():
            for part, val in (("re", v.re), ("im", v.im)):
                if val:
                    for target, f in contributions:
                        out.add(target, mono, part, f * (-val))
    return out


def assemble_curvature(functions: LogBasisExpr, forms: LogBasisExpr, graded: bool) -> LogBasisExpr:
    """Sum of the halves (ungraded) or their difference (graded)."""
    return functions.combine(forms, -1 if graded else 1)


def curvature_functions(functions: LogBasisExpr, forms: LogBasisExpr, graded: bool) -> dict:
    """The three slot functions of the assembled curvature."""
    return assemble_curvature(functions, forms, graded).decompose()


# ---------------------------------------------------------------- matrix model

def _log_k_data(ma):
    """log k, its derivatives and the eigen-data of k for a matrix assignment."""
    w, V = np.linalg.eigh((ma.k + ma.k.conj().T) / 2)
    lk = np.log(w)
    logk = (V * lk) @ V.conj().T
    D = ma._cache["D"]
    d = lambda j, x: D[j - 1] @ x - x @ D[j - 1]  # noqa: E731
    first = {i: d(i, logk) for i in (1, 2)}
    second = {(i, j): d(i, d(j, logk)) for i in (1, 2) for j in (1, 2)}
    return 2 * lk, V, first, second


def _one(f: ModFun, s2, V, x):
    """f(log Delta)(x) with log Delta acting as s_j - s_i in the eigenbasis."""
    S = s2[None, :] - s2[:, None]
    vals = modfun.vectorized(f)(S)
    return V @ (vals * (V.conj().T @ x @ V)) @ V.conj().T


def _two(f: ModFun, s2, V, x, y):
    n = len(s2)
    S = np.broadcast_to(s2[None, :, None] - s2[:, None, None], (n, n, n))
    T = np.broadcast_to(s2[None, None, :] - s2[None, :, None], (n, n, n))
    vals = modfun.vectorized(f)(S, T)
    xe, ye = V.conj().T @ x @ V, V.conj().T @ y @ V
    return V @ np.einsum("ijl,ij,jl->il", vals, xe, ye) @ V.conj().T


def eval_logbasis(lb: LogBasisExpr, ma) -> np.ndarray:
    """Matrix value of a log-basis expression (prefactor not included)."""
    s2, V, first, second = _log_k_data(ma)
    out = np.zeros_like(ma.k, dtype=complex)
    for ((kind, i, j), mono, part), f in lb.terms.items():
        c = ma.scalar(ScalarPoly.mono(mono, 1 if part == "re" else complex(0, 1)))
        if kind == LIN:
            out += c * _one(f, s2, V, second[(i, j)])
        else:
            out += c * _two(f, s2, V, first[i], first[j])
    return out


def lemma_matrix_residuals(ma) -> dict:
    """The two log k identities checked on a matrix assignment (any Hermitian log k)."""
    s2, V, first, second = _log_k_data(ma)
    k = ma.k
    kinv = np.linalg.inv(k)
    dk = {1: ma.dk[(1, 0)], 2: ma.dk[(0, 1)]}
    ddk = {(1, 1): ma.dk[(2, 0)], (2, 2): ma.dk[(0, 2)], (1, 2): ma.dk[(1, 1)], (2, 1): ma.dk[(1, 1)]}
    a, b = _a_x(), ModFun((X ** 2 - X) / LU, 1, ST)
    g = _fun_st("g")
    out = {}
    for i in (1, 2):
        out[f"first_{i}"] = _rel(kinv @ dk[i], 2 * _one(a, s2, V, first[i]))
        for j in (1, 2):
            lhs = kinv @ kinv @ dk[i] @ dk[j]
            rhs = 4 * _one(b, s2, V, first[i]) @ _one(a, s2, V, first[j])
            out[f"product_{i}{j}"] = _rel(lhs, rhs)
            lhs = kinv @ ddk[(i, j)]
            rhs = (2 * _one(a, s2, V, second[(i, j)]) + _two(g, s2, V, first[j], first[i])
                   + _two(g, s2, V, first[i], first[j]))
            out[f"second_{i}{j}"] = _rel(lhs, rhs)
    return out


def _rel(a, b) -> float:
    scale = max(np.abs(a).max(), np.abs(b).max(), 1e-300)
    return float(np.abs(a - b).max() / scale)


# ---------------------------------------------------------------- end-to-end assembly

def half_log_basis(half: str) -> LogBasisExpr:
    from .parametrix import parametrix_for
    from .reduce import assemble_basis_functions, collect_to_basis, radial_stage

    rad = radial_stage(parametrix_for(half).b2)
    assemble_basis_functions(rad, half)
    return k_to_log(collect_to_basis(rad, half))


CURVATURE_SLOTS = {
    ("functions", "linear"): "K", ("functions", "bilinear"): "H",
    ("forms", "linear"): "S", ("forms", "bilinear"): "T", ("forms", "antisym"): "W",
    ("ungraded", "linear"): "R1", ("ungraded", "bilinear"): "R2",
    ("graded", "linear"): "R1g", ("graded", "bilinear"): "R2g",
}


def pipeline_curvature(register: bool = True) -> dict:
    """Slot functions of both halves and of both assemblies, computed from b2.

    Returns {"functions"|"forms"|"ungraded"|"graded": {"linear", "bilinear", "antisym"}}.
    """
    fun, frm = half_log_basis("functions"), half_log_basis("forms")
    out = {
        "functions": fun.decompose(),
        "forms": frm.decompose(),
        "ungraded": curvature_functions(fun, frm, graded=False),
        "graded": curvature_functions(fun, frm, graded=True),
    }
    if register:
        for (group, slot), name in CURVATURE_SLOTS.items():
            modfun.register_assembled(name, out[group][slot])
    return out
