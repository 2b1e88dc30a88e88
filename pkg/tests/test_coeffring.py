from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings

from nctorus.coeffring import (
    ABS_TAU2, I_POLY, TAU, TAU1, TAU2, TAUBAR, XI1, XI2,
    DivisionByZero, GaussRat, MissingAssignment, P, ScalarPoly,
    parse_poly, poly_add, poly_eval, poly_mul,
)

from strategies import polys


def test_gauss_lowest_terms():
    g = GaussRat(Fraction(4, -6), Fraction(2, 4))
    assert g.re == Fraction(-2, 3) and g.re.denominator == 3
    assert g.text() == "(-2/3+1/2*I)"


def test_add_examples():
    assert poly_add(P(1) + I_POLY, P(1) - I_POLY) == P(2)
    p = TAU1 * XI1
    assert poly_add(p, ScalarPoly()) == p
    assert poly_add(ABS_TAU2, -(TAU2 * TAU2)) == TAU1 * TAU1


def test_mul_examples():
    assert poly_mul(TAU, TAUBAR) == ABS_TAU2
    assert poly_mul(XI1, XI1) == ScalarPoly.var("x1", 2)
    inv = ScalarPoly.var("t2", -1)
    assert poly_mul(XI1 + TAU1 * XI2, inv) == inv * XI1 + TAU1 * inv * XI2


def test_eval_examples():
    p = XI1 * XI1 * TAU1
    assert poly_eval(p, {"x1": 2, "t1": 3}) == 12
    assert poly_eval(ScalarPoly.var("t2", -1), {"t2": 2}) == mpmath.mpf("0.5")
    assert poly_eval(ABS_TAU2, {"t1": 0, "t2": 1}) == 1


def test_eval_errors():
    with pytest.raises(MissingAssignment):
        poly_eval(XI1, {"x2": 1})
    with pytest.raises(DivisionByZero):
        poly_eval(ScalarPoly.var("t2", -1), {"t2": 0})


def test_text_format():
    p = P(2) * TAU1 * XI1 * XI2 + XI1 * XI1
    assert p.text() == "(2+0*I)*t1*x1*x2 + (1+0*I)*x1^2"
    assert parse_poly(p.text()) == p
    assert ScalarPoly().text() == "(0+0*I)"
    assert parse_poly("(0+0*I)") == ScalarPoly()


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(p, q, s):
    assert (p + q) + s == p + (q + s)
    assert p * q == q * p
    assert p * (q + s) == p * q + p * s
    assert (p * q) * s == p * (q * s)


@settings(max_examples=40, deadline=None)
@given(polys(), polys())
def test_eval_homomorphism(p, q):
    at = {"x1": 0.7, "x2": -1.3, "r": 0.4, "t1": 0.25, "t2": 1.7}
    a = complex(poly_eval(p * q, at))
    b = complex(poly_eval(p, at)) * complex(poly_eval(q, at))
    assert abs(a - b) <= 1e-14 * max(1.0, abs(a), abs(b))


@settings(max_examples=40, deadline=None)
@given(polys())
def test_parse_roundtrip(p):
    assert parse_poly(p.text()) == p
