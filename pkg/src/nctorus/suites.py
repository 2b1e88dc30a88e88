"""Verification suites shared by the command line and the acceptance tests.

Each suite returns a SuiteResult with one Residual per measured quantity.
Tolerances live here so that every consumer applies the same thresholds.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import logform, modfun, parametrix, reduce, torusnum
from .ncsymbol import eval_matrix, eval_word, random_assignment, rel_err
from .parametrix import FORMS, FUNCTIONS, HALVES

SUITES = (
    "goldens", "parametrix", "angular", "radial", "closedforms", "limits",
    "oracles", "gaussbonnet", "commutative", "logderiv", "heat",
)
GATING = SUITES[:-1]


@dataclass
class Residual:
    name: str
    value: float
    tolerance: float
    ok: bool

    @classmethod
    def at_most(cls, name: str, value: float, tol: float) -> "Residual":
        value = float(value)
        return cls(name, value, tol, bool(value <= tol))

    @classmethod
    def exact(cls, name: str, ok: bool) -> "Residual":
        return cls(name, 0.0 if ok else 1.0, 0.0, bool(ok))


@dataclass
class SuiteResult:
    suite: str
    params: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.residuals) and all(r.ok for r in self.residuals)

    def failures(self) -> list:
        return [r for r in self.residuals if not r.ok]

    def as_dict(self, timing: bool = False) -> dict:
        out = {
            "suite": self.suite,
            "params": self.params,
            "residuals": [asdict(r) for r in self.residuals],
            "pass": self.passed,
        }
        if timing:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    precision: int = 33
    grid: int = 1024
    assignments: int = 20
    dim: int = 4
    random_points: int = 100
    quadrature_points: int = 20


# ---------------------------------------------------------------- symbolic suites

def suite_goldens(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("goldens")
    for half in HALVES:
        recs = parametrix.spot_check(half)
        res.residuals.append(Residual.at_most(f"{half}: transcribed terms >= 12", 12 - len(recs), 0))
        for r in recs:
            res.residuals.append(Residual.exact(f"{half}: {r['term']}", r["match"]))
    return res


def suite_parametrix(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("parametrix")
    for half in HALVES:
        rep = parametrix.verify_parametrix(parametrix.parametrix_for(half), parametrix.operator_symbol(half))
        for n, (expected, ok, _) in sorted(rep.orders.items(), reverse=True):
            res.residuals.append(Residual.exact(f"{half}: order {n} equals {expected}", ok))
    return res


ANGULAR_SPOTS = {
    FUNCTIONS: {
        "b0*k*d1^2(k)*b0": {("(-2+0*I)", "1")},
        "b0^2*k^2*d1(k)*d1(k)*b0": {("(8+0*I)", "r^2")},
        "b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k": {("(4+0*I)", "t1^2*r^6"), ("(4+0*I)", "t2^2*r^6")},
    },
    FORMS: {
        # -2 (tau1 + i tau2) r^4 and -2 (tau1 - i tau2) r^4 families
        "b0*k*d2(k)*b0^2*k^2*d1(k)*b0*k": {("(-2+0*I)", "t1*r^4"), ("(0-2*I)", "t2*r^4")},
        "b0*d2(k)*b0^2*k^3*d1(k)*b0*k": {("(-2+0*I)", "t1*r^4"), ("(0-2*I)", "t2*r^4")},
        "b0*k*d1(k)*b0^2*k^2*d2(k)*b0*k": {("(-2+0*I)", "t1*r^4"), ("(0+2*I)", "t2*r^4")},
        "b0*d1(k)*b0^2*k^3*d2(k)*b0*k": {("(-2+0*I)", "t1*r^4"), ("(0+2*I)", "t2*r^4")},
    },
}


def _angular(half: str):
    return reduce.angular_stage(parametrix.parametrix_for(half).b2)


def suite_angular(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("angular")
    for half in HALVES:
        ang = _angular(half)
        recs: dict = {}
        for r in ang.records():
            recs.setdefault(r["word"], set()).add((r["coeff"], r["monomial"]))
        for word, want in ANGULAR_SPOTS[half].items():
            res.residuals.append(Residual.exact(f"{half}: {word}", recs.get(word) == want))
        neg = [m for _, c in ang.items() for m in c.terms if m[4] < 0]
        res.residuals.append(Residual.exact(f"{half}: no inverse tau2 powers", not neg))
    return res


# one-variable part of the functions-half radial output
RADIAL_ONE_FUNCTIONS = [
    ("(-1+0*I)", "L0(Delta)(k^-1*d1^2(k))"),
    ("(-2+0*I)*t1", "L0(Delta)(k^-1*d1d2(k))"),
    ("(-1+0*I)*t1^2 + (-1+0*I)*t2^2", "L0(Delta)(k^-1*d2^2(k))"),
    ("(1+0*I)", "L1(Delta)(Delta^1/2(k^-1*d1^2(k)))"),
    ("(2+0*I)*t1", "L1(Delta)(Delta^1/2(k^-1*d1d2(k)))"),
    ("(1+0*I)*t1^2 + (1+0*I)*t2^2", "L1(Delta)(Delta^1/2(k^-1*d2^2(k)))"),
    ("(3+0*I)", "L1(Delta)(k^-1*d1^2(k))"),
    ("(6+0*I)*t1", "L1(Delta)(k^-1*d1d2(k))"),
    ("(3+0*I)*t1^2 + (3+0*I)*t2^2", "L1(Delta)(k^-1*d2^2(k))"),
    ("(4+0*I)", "L1(Delta)(k^-2*d1(k)*d1(k))"),
    ("(4+0*I)*t1", "L1(Delta)(k^-2*d1(k)*d2(k))"),
    ("(4+0*I)*t1", "L1(Delta)(k^-2*d2(k)*d1(k))"),
    ("(4+0*I)*t1^2 + (4+0*I)*t2^2", "L1(Delta)(k^-2*d2(k)*d2(k))"),
    ("(-2+0*I)", "L2(Delta)(Delta^1/2(k^-1*d1^2(k)))"),
    ("(-4+0*I)*t1", "L2(Delta)(Delta^1/2(k^-1*d1d2(k)))"),
    ("(-2+0*I)*t1^2 + (-2+0*I)*t2^2", "L2(Delta)(Delta^1/2(k^-1*d2^2(k)))"),
    ("(-2+0*I)", "L2(Delta)(k^-1*d1^2(k))"),
    ("(-4+0*I)*t1", "L2(Delta)(k^-1*d1d2(k))"),
    ("(-2+0*I)*t1^2 + (-2+0*I)*t2^2", "L2(Delta)(k^-1*d2^2(k))"),
    ("(-4+0*I)", "L2(Delta)(k^-2*d1(k)*d1(k))"),
    ("(-4+0*I)*t1", "L2(Delta)(k^-2*d1(k)*d2(k))"),
    ("(-4+0*I)*t1", "L2(Delta)(k^-2*d2(k)*d1(k))"),
    ("(-4+0*I)*t1^2 + (-4+0*I)*t2^2", "L2(Delta)(k^-2*d2(k)*d2(k))"),
]

# (angular word, monomial text, coefficient) -> the single two-letter application it produces
RADIAL_TWO_SPOTS = [
    ("b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k", 4, "t1^2+t2^2",
     "D22(Delta1,Delta2)(Delta^-1(d2(k)*k^-1)*Delta^1/2(k^-1*d2(k)))", "(2+0*I)*t1^2 + (2+0*I)*t2^2"),
    ("b0^2*k^2*d1(k)*b0^2*k^3*d1(k)*b0*k", 4, "1",
     "D22(Delta1,Delta2)(Delta^-1(d1(k)*k^-1)*Delta^1/2(k^-1*d1(k)))", "(2+0*I)"),
]


def suite_radial(cfg: SuiteConfig) -> SuiteResult:
    from .ncsymbol import parse_expr

    res = SuiteResult("radial")
    rad = reduce.radial_stage(parametrix.parametrix_for(FUNCTIONS).b2)
    ones = sorted((c.text(), a.text()) for a, c in rad.items() if isinstance(a, reduce.One))
    res.residuals.append(Residual.exact("functions: one-variable list", ones == sorted(RADIAL_ONE_FUNCTIONS)))
    for word, c, mono, app, coeff in RADIAL_TWO_SPOTS:
        # r^6 is the radial weight of these three-b0 words
        parts = [parse_expr(f"({c}+0*I)*" + ("" if m == "1" else m + "*") + f"r^6*{word}") for m in mono.split("+")]
        single = reduce.radial_integrate(sum(parts[1:], parts[0]))
        got = [(a.text(), cc.text()) for a, cc in single.items()]
        res.residuals.append(Residual.exact(f"single term {word}", got == [(app, coeff)]))
        total = {a.text(): cc.text() for a, cc in rad.items()}
        res.residuals.append(Residual.exact(f"aggregate {app}", total.get(app) == coeff))
    return res


CLOSED_NAMES = ("f1", "f2", "g1", "g2", "F", "G", "L")


def suite_closedforms(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("closedforms", {"points": cfg.random_points})
    rng = np.random.default_rng(cfg.seed)
    ecfg = modfun.EvalConfig(precision=cfg.precision)
    for half in HALVES:
        rad = reduce.radial_stage(parametrix.parametrix_for(half).b2)
        reduce.assemble_basis_functions(rad, half)
    for name in CLOSED_NAMES:
        a, c = modfun.assembled(name), modfun.closed_form(name)
        res.residuals.append(Residual.exact(f"{name}: exact identity", modfun.normal_equal(a, c)))
        worst = 0.0
        for _ in range(cfg.random_points):
            pt = tuple(float(x) for x in np.exp(rng.uniform(-3, 3, size=a.arity)))
            pt = pt if a.arity == 2 else pt[0]
            x, y = modfun.evaluate(a, pt, ecfg), modfun.evaluate(c, pt, ecfg)
            worst = max(worst, float(abs(x - y) / max(abs(y), 1e-300)))
        res.residuals.append(Residual.at_most(f"{name}: numeric relative", worst, 1e-12))
    return res


LIMITS = {"R1": (0.0, -1 / 3), "R1g": (0.0, 1.0), "R2": ((0.0, 0.0), 0.0),
          "R2g": ((0.0, 0.0), 0.0), "W": ((0.0, 0.0), -2 / 3)}


def _fmt_point(pt) -> str:
    return ", ".join(f"{x:g}" for x in (pt if isinstance(pt, tuple) else (pt,)))


def suite_limits(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("limits")
    ecfg = modfun.EvalConfig(precision=cfg.precision)
    for name, (pt, want) in LIMITS.items():
        got = float(modfun.evaluate(name, pt, ecfg))
        res.residuals.append(Residual.at_most(f"{name}({_fmt_point(pt)}) = {want:.12g}", abs(got - want), 1e-10))
    return res


# ---------------------------------------------------------------- oracle suite

def _polar_assignment(rng, dim):
    ma = random_assignment(rng, dim, polar=True)
    ma.scalars["t2"] = rng.uniform(0.5, 2.0)
    return ma


def angular_quadrature_error(half: str, ma, n_phi: int = 256) -> float:
    """Trapezoid average of b2 over the circle against the exact angular output."""
    b2 = parametrix.parametrix_for(half).b2
    ang = _angular(half)
    r, t1, t2 = (ma.scalars[k] for k in ("r", "t1", "t2"))
    acc = np.zeros((ma.dim, ma.dim), dtype=complex)
    for phi in 2 * np.pi * np.arange(n_phi) / n_phi:
        ma.scalars["x1"] = r * math.cos(phi) - r * t1 / t2 * math.sin(phi)
        ma.scalars["x2"] = r / t2 * math.sin(phi)
        acc += eval_matrix(b2, ma)
    # units of pi: (1/pi) int_0^{2 pi} = 2 * mean
    return rel_err(2 * acc / n_phi, eval_matrix(ang, ma))


def _at_r(ma, r: float):
    """Copy of a polar assignment at another radius (b0 caches dropped)."""
    out = dataclasses.replace(ma, scalars={**ma.scalars, "r": r}, _cache={})
    out._cache["D"] = ma._cache["D"]
    return out


def radial_quadrature_error(half: str, ma) -> float:
    """Adaptive u-quadrature of the angular output against the radial modular value."""
    ang = _angular(half)
    rad = reduce.radial_stage(parametrix.parametrix_for(half).b2)
    val, _ = integrate.quad_vec(lambda u: 0.5 * eval_matrix(ang, _at_r(ma, math.sqrt(u))),
                                0.0, np.inf, epsrel=1e-10, epsabs=1e-13)
    return rel_err(val, reduce.eval_modular(rad, ma))


def stage_errors(half: str, ma) -> dict:
    b2 = parametrix.parametrix_for(half).b2
    rad = reduce.radial_stage(b2)
    grp = reduce.collect_to_basis(rad, half)
    lb = logform.k_to_log(grp)
    g_val = reduce.eval_modular(grp, ma)
    return {
        "radial->grouped": rel_err(reduce.eval_modular(rad, ma), g_val),
        "grouped->log basis": rel_err(-g_val, logform.eval_logbasis(lb, ma)),
    }


def polar_substitution_error(half: str, ma, phi: float) -> float:
    b2 = parametrix.parametrix_for(half).b2
    r, t1, t2 = (ma.scalars[k] for k in ("r", "t1", "t2"))
    ma.scalars["x1"] = r * math.cos(phi) - r * t1 / t2 * math.sin(phi)
    ma.scalars["x2"] = r / t2 * math.sin(phi)
    direct = eval_matrix(b2, ma)
    acc = np.zeros_like(direct)
    for t in reduce.polar_substitute(b2):
        p, q = t.trig
        acc += ma.scalar(t.coeff) * math.cos(phi) ** p * math.sin(phi) ** q * eval_word(t.word, ma)
    return rel_err(direct, acc)


def suite_oracles(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("oracles", {"assignments": cfg.assignments, "dim": cfg.dim})
    rng = np.random.default_rng(cfg.seed)
    worst: dict = {}

    def note(key, v):
        worst[key] = max(worst.get(key, 0.0), v)

    for i in range(cfg.assignments):
        for half in HALVES:
            ma = _polar_assignment(rng, cfg.dim)
            note(f"{half}: polar substitution", polar_substitution_error(half, ma, rng.uniform(0, 2 * np.pi)))
            for k, v in stage_errors(half, ma).items():
                note(f"{half}: {k}", v)
            if i < 2:
                note(f"{half}: angular 256-point quadrature", angular_quadrature_error(half, ma))
                note(f"{half}: radial u-quadrature", radial_quadrature_error(half, ma))
    tols = {"polar substitution": 1e-10, "radial->grouped": 1e-10, "grouped->log basis": 1e-10,
            "angular 256-point quadrature": 1e-8, "radial u-quadrature": 1e-6}
    for key, v in sorted(worst.items()):
        res.residuals.append(Residual.at_most(key, v, tols[key.split(": ", 1)[1]]))
    qerr = 0.0
    for j in range(cfg.quadrature_points):
        u, v = (float(x) for x in np.exp(rng.uniform(-2.5, 2.5, size=2)))
        for name in ("L0", "L1", "L2", "L3"):
            qerr = max(qerr, float(abs(modfun.evaluate(name, (u,)) - modfun.quadrature_oracle(name, (u,)))))
        for name in ("D11", "D12", "D21", "D22", "D31"):
            qerr = max(qerr, float(abs(modfun.evaluate(name, (u, v)) - modfun.quadrature_oracle(name, (u, v)))))
    res.residuals.append(Residual.at_most("L_m and D_{m,m'} against defining integrals", qerr, 1e-9))
    return res


# ---------------------------------------------------------------- torus suites

TAUS = (1j, 1 / 3 + 1j, -1 / 2 + 2j)
THETAS = ("0", "1/1024", "7/1024")


def _theta_params(theta: str, tau: complex, G: int) -> torusnum.TorusParams:
    from fractions import Fraction

    return torusnum.TorusParams.from_theta(Fraction(theta), tau, G)


def suite_gaussbonnet(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("gaussbonnet", {"exponents": 5, "thetas": list(THETAS),
                                      "taus": [[t.real, t.imag] for t in TAUS], "G": cfg.grid})
    rng = np.random.default_rng(cfg.seed)
    hs = [torusnum.random_circle_fun(rng, 3, 1.0, cfg.grid) for _ in range(5)]
    for theta in THETAS:
        for tau in TAUS:
            P = _theta_params(theta, tau, cfg.grid)
            for graded in (False, True):
                worst = max(torusnum.gauss_bonnet_check(h, P, graded) for h in hs)
                label = "graded" if graded else "ungraded"
                res.residuals.append(Residual.at_most(
                    f"theta={theta} tau={tau.real:g}{tau.imag:+g}i {label}", worst, 1e-8))
    return res


def suite_commutative(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("commutative", {"G": cfg.grid})
    rng = np.random.default_rng(cfg.seed + 1)
    for tau in TAUS:
        P = torusnum.TorusParams(0, tau, cfg.grid)
        worst = 0.0
        for _ in range(3):
            h = torusnum.random_circle_fun(rng, 3, 1.0, cfg.grid)
            R = torusnum.curvature_numeric(h, P)
            C = torusnum.commutative_curvature(h, P)
            worst = max(worst, (R - C).norm() / max(C.norm(), 1e-300))
        res.residuals.append(Residual.at_most(f"tau={tau.real:g}{tau.imag:+g}i", worst, 1e-10))
    return res


def suite_logderiv(cfg: SuiteConfig) -> SuiteResult:
    res = SuiteResult("logderiv", {"G": cfg.grid})
    rng = np.random.default_rng(cfg.seed + 2)
    worst: dict = {}
    for theta in THETAS[1:]:
        P = _theta_params(theta, TAUS[1], cfg.grid)
        for _ in range(3):
            h = torusnum.random_circle_fun(rng, 3, 1.0, cfg.grid)
            for k, v in torusnum.lemma_residuals(h, P).items():
                kind = "product identity" if k.startswith("product") else "second-derivative identity"
                worst[f"torus: {kind}"] = max(worst.get(f"torus: {kind}", 0.0), v)
    for _ in range(5):
        ma = random_assignment(rng, cfg.dim)
        for k, v in logform.lemma_matrix_residuals(ma).items():
            kind = {"first": "first-derivative identity", "product": "product identity",
                    "second": "second-derivative identity"}[k.split("_")[0]]
            worst[f"matrix: {kind}"] = max(worst.get(f"matrix: {kind}", 0.0), v)
    for key, v in sorted(worst.items()):
        res.residuals.append(Residual.at_most(key, v, 1e-8))
    return res


def suite_heat(cfg: SuiteConfig) -> SuiteResult:
    G = min(cfg.grid, 256)
    P = torusnum.TorusParams(0, TAUS[1], G)
    hc = torusnum.HeatConfig()
    res = SuiteResult("heat", {"M": hc.M, "t_grid": [round(t, 6) for t in hc.t_grid], "G": G})
    h = torusnum.CircleFun.from_fourier({1: 0.1, -1: 0.1, 2: 0.03j, -2: -0.03j}, G)
    a = torusnum.CircleFun.from_fourier({0: 1.0, 1: 0.5, -1: 0.5}, G)
    try:
        out = torusnum.heat_oracle(h, P, a, hc)
    except torusnum.TruncationTooSmall as exc:
        res.residuals.append(Residual("flat calibration", math.inf, 0.01, False))
        res.params["error"] = str(exc)
        return res
    res.residuals.append(Residual.at_most("flat calibration c_-1 vs pi/tau2", out["flat_calibration_error"], 0.01))
    res.residuals.append(Residual.at_most("c0 vs -(pi/tau2) t(a R_functions)", out["relative_error"], 0.05))
    res.params.update({k: out[k] for k in ("c0", "predicted_c0")})
    return res


RUNNERS = {name: globals()[f"suite_{name}"] for name in SUITES}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    t = time.perf_counter()
    res = RUNNERS[name](cfg)
    res.seconds = time.perf_counter() - t
    return res


def verify_all(cfg: SuiteConfig = SuiteConfig(), names=GATING) -> list:
    return [run_suite(n, cfg) for n in names]
