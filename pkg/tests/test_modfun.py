from fractions import Fraction

import mpmath
import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from nctorus import modfun
from nctorus.modfun import (
    KF, LU, LV, ST, UV, X, Y, EvalConfig, ModFun, NotRational, UnknownFunction,
    at_sum, closed_form, evaluate, exp_view, monomial, normal_equal, swap,
)


@pytest.fixture(autouse=True)
def digits():
    with mpmath.workdps(50):
        yield


def uv(e, arity=1):
    return ModFun(e, arity, UV)


def close(a, b, tol=1e-25):
    return abs(a - b) <= tol * max(1, abs(b))


def test_L0_closed_form():
    assert normal_equal(closed_form("L0"), uv(LU / (X ** 2 - 1)))


def test_f2_closed_form():
    u = X ** 2
    assert normal_equal(closed_form("f2"), uv(2 * (-1 + u ** 2 - 2 * u * LU) / (u - 1) ** 3))


def test_f2_equals_g2():
    assert normal_equal(closed_form("f2"), closed_form("g2"))


def test_W_closed_form_hyperbolic():
    with mpmath.workdps(50):
        s, t = mpmath.mpf("0.7"), mpmath.mpf("-1.3")
        want = ((-s - t + t * mpmath.cosh(s) + s * mpmath.cosh(t) + mpmath.sinh(s) + mpmath.sinh(t)
                 - mpmath.sinh(s + t)) / (s * t * mpmath.sinh(s / 2) * mpmath.sinh(t / 2) * mpmath.sinh((s + t) / 2)))
        assert close(evaluate("W", (s, t)), want)


@pytest.mark.parametrize("name", modfun.names())
def test_definition_equals_closed(name):
    assert modfun.verify(name)["definition_equals_closed"]


def test_symmetries_exact():
    assert all(modfun.symmetry_report().values())


def test_symmetry_report_detects_breakage():
    W = closed_form("W")
    assert not normal_equal(W, swap(W) * 2)


def test_normal_equal_rejects_mixed_views():
    with pytest.raises(NotRational):
        normal_equal(closed_form("f1"), closed_form("K"))


def test_unknown_function():
    with pytest.raises(UnknownFunction):
        closed_form("nope")
    with pytest.raises(UnknownFunction):
        modfun.quadrature_oracle("nope", 1.0)


def test_entry_builds_derived_D_on_demand():
    e = modfun.entry("D41")
    assert e.arity == 2
    assert close(evaluate(e.definition, (2.0, 3.0)), modfun.quadrature_oracle("D41", (2, 3)), 1e-20)


def test_eval_config_guards():
    with pytest.raises(ValueError):
        EvalConfig(precision=20)
    with pytest.raises(ValueError):
        EvalConfig(taylor_order=4)


def test_uv_view_needs_positive_point():
    with pytest.raises(ValueError):
        evaluate("f1", -1.0)


@pytest.mark.parametrize("name, point, want", [
    ("R1", 0, Fraction(-1, 3)),
    ("R1g", 0, 1),
    ("R2", (0, 0), 0),
    ("R2g", (0, 0), 0),
    ("W", (0, 0), Fraction(-2, 3)),
])
def test_limits(name, point, want):
    want = mpmath.mpf(want.numerator) / want.denominator if isinstance(want, Fraction) else want
    assert abs(evaluate(name, point) - want) < 1e-30


@pytest.mark.parametrize("m", [0, 1, 2])
def test_L_at_one(m):
    assert close(evaluate(f"L{m}", 1), mpmath.mpf(1) / (m + 1))
    assert close(modfun.quadrature_oracle(f"L{m}", 1), mpmath.mpf(1) / (m + 1), 1e-20)


def test_D11_at_one():
    assert close(evaluate("D11", (1, 1)), mpmath.mpf(1) / 2)


def test_quadrature_examples():
    assert close(modfun.quadrature_oracle("L0", 2), mpmath.log(2), 1e-20)
    assert close(modfun.quadrature_oracle("D21", (2, 3)), evaluate("D21", (2, 3)), 1e-20)
    assert close(modfun.quadrature_oracle("D31", (1, 1)), evaluate("D31", (1, 1)), 1e-20)


def test_printed_simplifications():
    rng = np.random.default_rng(3)
    for x in rng.uniform(-6, 6, 100):
        for name in ("R1", "R1g", "K", "S"):
            want = evaluate(name, x)
            for p in modfun.printed_numeric(name, x):
                assert abs(p - want) <= 1e-12 * abs(want)


def test_printed_two_variable_forms():
    rng = np.random.default_rng(4)
    for s, t in rng.uniform(-4, 4, (100, 2)):
        if min(abs(s), abs(t), abs(s + t)) < 1e-3:
            continue
        for name in ("H", "T", "W", "R2"):
            want = evaluate(name, (s, t))
            for p in modfun.printed_numeric(name, (s, t)):
                assert abs(p - want) <= 1e-12 * max(abs(want), 1e-300)


def test_R2_is_H_plus_T_and_curvature_halves():
    reg = modfun.registry()
    assert normal_equal(reg["R1"].closed, reg["K"].closed + reg["S"].closed)
    assert normal_equal(reg["R1g"].closed, reg["K"].closed - reg["S"].closed)
    assert normal_equal(reg["R2g"].closed, reg["H"].closed - reg["T"].closed)


def test_exp_view_and_helpers():
    f = uv(X ** 2 * LU)
    e = exp_view(f)
    assert e.view == ST
    assert close(evaluate(e, 0.5), mpmath.exp(mpmath.mpf("0.5")) * 0.5)
    g = exp_view(uv(X ** 2, 1))
    assert close(evaluate(at_sum(g), (mpmath.mpf("0.3"), mpmath.mpf("0.4"))), mpmath.exp(mpmath.mpf("0.7")))
    assert normal_equal(monomial(1, 0), uv(X ** 2))


def test_taylor_origin_R1():
    c = modfun.taylor_origin(closed_form("R1"), 4)
    assert c[0] == sympy.Rational(-1, 3) or float(c[0]) == pytest.approx(-1 / 3, abs=1e-30)
    assert float(c[1]) == pytest.approx(0.0, abs=1e-30)


def test_vectorized_matches_evaluate():
    rng = np.random.default_rng(5)
    s, t = rng.uniform(-3, 3, (2, 200))
    s[:5] = [0.0, 1e-4, 0.3, -0.2, 2.0]
    t[:5] = [0.0, 0.1, -0.3, 1e-7, -2.0]
    for name in ("R2", "W", "F", "D22"):
        f = modfun.assembled(name)
        fast = modfun.vectorized(f)(s, t)
        ref = [float(evaluate(f if f.view == ST else exp_view(f), (a, b))) for a, b in zip(s, t)]
        assert np.max(np.abs(fast - ref) / np.maximum(1, np.abs(ref))) < 1e-11


@settings(max_examples=40, deadline=None)
@given(st.floats(-4, 4), st.floats(1e-9, 2e-3))
def test_singular_zone_is_continuous(x, eps):
    """Values just inside and outside the Taylor zone agree."""
    cfg = EvalConfig()
    a = evaluate("R2", (eps, x), cfg)
    b = evaluate("R2", (cfg.eps_s * 1.5, x), cfg)
    slope = abs(evaluate("R2", (cfg.eps_s * 3, x), cfg) - b) / (cfg.eps_s * 1.5)
    assert abs(a - b) <= 2 * slope * cfg.eps_s + 1e-20


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.2, 5))
def test_D22_against_quadrature(u, v):
    assert close(evaluate("D22", (u, v)), modfun.quadrature_oracle("D22", (u, v)), 1e-18)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5).filter(lambda x: abs(x) > 1e-6))
def test_R1_even_and_R1g_even(x):
    assert close(evaluate("R1", x), evaluate("R1", -x), 1e-28)
    assert close(evaluate("R1g", x), evaluate("R1g", -x), 1e-28)


def test_precision_is_honoured():
    v = evaluate("L0", 2, EvalConfig(precision=60))
    with mpmath.workdps(70):
        assert abs(v - mpmath.log(2)) < mpmath.mpf(10) ** -55
