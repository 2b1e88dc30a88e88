from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nctorus import modfun, reduce, suites
from nctorus.coeffring import ScalarPoly
from nctorus.ncsymbol import (
    DK, Kpow, eval_word, parse_expr, random_assignment, rel_err,
)
from nctorus.parametrix import FORMS, FUNCTIONS, parametrix_for
from nctorus.reduce import (
    ModularExpr, ModWordLetter, One, PatternMismatch, ResidualTau2, TrigTerm, Two,
    angular_integrate, collect_to_basis, delta_twist_normalize, polar_substitute,
    radial_integrate, trig_integral,
)


def word_of(text):
    (w, _), = parse_expr("(1+0*I)*" + text).items()
    return w


def trig_table(text):
    return {t.trig: t.coeff.text() for t in polar_substitute(parse_expr(text))}


@pytest.fixture(scope="module")
def radial():
    return {h: reduce.radial_stage(parametrix_for(h).b2) for h in (FUNCTIONS, FORMS)}


def test_polar_xi1_squared():
    assert trig_table("(1+0*I)*x1^2*k") == {
        (2, 0): "(1+0*I)*r^2",
        (1, 1): "(-2+0*I)*t1*t2^-1*r^2",
        (0, 2): "(1+0*I)*t1^2*t2^-2*r^2",
    }


def test_polar_xi2_squared():
    assert trig_table("(1+0*I)*x2^2*k") == {(0, 2): "(1+0*I)*t2^-2*r^2"}


def test_polar_xi_free():
    (t,) = polar_substitute(parse_expr("(3+0*I)*t1*b0*k*b0"))
    assert t.trig == (0, 0) and t.coeff.text() == "(3+0*I)*t1"


@pytest.mark.parametrize("p, q, want", [
    (0, 0, Fraction(2)), (2, 0, Fraction(1)), (0, 2, Fraction(1)), (1, 1, Fraction(0)),
    (4, 0, Fraction(3, 4)), (2, 2, Fraction(1, 4)), (3, 1, Fraction(0)),
])
def test_trig_integral(p, q, want):
    assert trig_integral(p, q) == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 6), st.integers(0, 6))
def test_trig_integral_numeric(p, q):
    phi = 2 * np.pi * np.arange(512) / 512
    num = np.mean(np.cos(phi) ** p * np.sin(phi) ** q) * 2
    assert abs(num - float(trig_integral(p, q))) < 1e-12


def test_angular_rejects_residual_tau2():
    bad = TrigTerm(ScalarPoly.mono((0, 0, 0, 0, -1), 1), (0, 0), word_of("b0*k*b0"))
    with pytest.raises(ResidualTau2):
        angular_integrate([bad])


@pytest.mark.parametrize("half", [FUNCTIONS, FORMS])
def test_angular_spot_terms(half):
    ang = reduce.angular_stage(parametrix_for(half).b2)
    recs = {}
    for r in ang.records():
        recs.setdefault(r["word"], set()).add((r["coeff"], r["monomial"]))
    for word, want in suites.ANGULAR_SPOTS[half].items():
        assert recs[word] == want
    assert all(m[4] >= 0 for _, c in ang.items() for m in c.terms)


def test_normalize_two_letter():
    s, p, pat = delta_twist_normalize(word_of("b0^2*k^2*d1(k)*b0^2*k^3*d1(k)*b0*k"), 6)
    assert (s, p) == (8, 3)
    assert pat.text(s, p) == "b0^2*Delta^-1(d1(k)*k^-1)*[k^8*u^3]*b0^2*Delta^1/2(k^-1*d1(k))*b0"


def test_normalize_one_letter():
    s, p, pat = delta_twist_normalize(word_of("b0^2*k^3*d1^2(k)*b0"), 2)
    assert (s, p) == (4, 1) and pat.j0 == 2
    assert pat.left == ModWordLetter(Fraction(0), (Kpow(-1), DK(2, 0)))


def test_normalize_no_r():
    s, p, pat = delta_twist_normalize(word_of("b0*k*d1^2(k)*b0"), 0)
    assert (s, p, pat.j0) == (2, 0, 1)


@pytest.mark.parametrize("word, rp", [
    ("b0*k*d1^2(k)*b0", 2),
    ("b0^2*k^3*d1^2(k)*b0", 1),
    ("k*d1(k)*b0", 0),
    ("b0*d1(k)*b0*d2(k)*b0*d1(k)*b0", 4),
])
def test_normalize_mismatch(word, rp):
    with pytest.raises(PatternMismatch):
        delta_twist_normalize(word_of(word), rp)


@pytest.mark.parametrize("word, rp", [
    ("b0^2*k^2*d1(k)*b0^2*k^3*d1(k)*b0*k", 6),
    ("b0^2*k^3*d1^2(k)*b0", 2),
    ("b0*k*d1^2(k)*b0", 0),
    ("b0*d2(k)*b0^2*k^3*d1(k)*b0*k", 4),
    ("b0^2*k^2*d1(k)*d2(k)*b0", 2),
])
def test_normalized_pattern_matrix_oracle(word, rp):
    """The rewritten pattern equals r^rp * word as matrices, at several radii."""
    rng = np.random.default_rng(11)
    ma = random_assignment(rng, 4, polar=True)
    w = word_of(word)
    s, p, pat = delta_twist_normalize(w, rp)
    for r in (0.3, 1.0, 2.2):
        direct = r ** rp * eval_word(w, suites._at_r(ma, r))
        assert rel_err(reduce.pattern_matrix(s, p, pat, ma, r * r), direct) < 1e-9


def test_radial_examples():
    assert radial_integrate(parse_expr("(-2+0*I)*b0*k*d1^2(k)*b0")).text() == \
        "[(-1+0*I)]*L0(Delta)(k^-1*d1^2(k))"
    assert radial_integrate(parse_expr("(6+0*I)*r^2*b0^2*k^3*d1^2(k)*b0")).text() == \
        "[(3+0*I)]*L1(Delta)(k^-1*d1^2(k))"
    x = parse_expr("(4+0*I)*t1^2*r^6*b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k"
                   " + (4+0*I)*t2^2*r^6*b0^2*k^2*d2(k)*b0^2*k^3*d2(k)*b0*k")
    assert radial_integrate(x).text() == \
        "[(2+0*I)*t1^2 + (2+0*I)*t2^2]*D22(Delta1,Delta2)(Delta^-1(d2(k)*k^-1)*Delta^1/2(k^-1*d2(k)))"


def test_radial_empty():
    out = radial_integrate(parse_expr("0"))
    assert not out and out.pi


def test_functions_radial_one_variable_list(radial):
    ones = sorted((c.text(), a.text()) for a, c in radial[FUNCTIONS].items() if isinstance(a, One))
    assert ones == sorted(suites.RADIAL_ONE_FUNCTIONS)


def test_forms_radial_has_imaginary_terms(radial):
    assert any(v.im for _, c in radial[FORMS].items() for v in c.terms.values())
    assert not any(v.im for _, c in radial[FUNCTIONS].items() for v in c.terms.values())


def test_grouped_functions_delta11_slot(radial):
    g = collect_to_basis(radial[FUNCTIONS], FUNCTIONS)
    texts = {a.text(): c.text() for a, c in g.items()}
    assert texts["f1(Delta)(k^-1*d1^2(k))"] == "(1+0*I)"
    assert texts["f2(Delta)(k^-2*d1(k)*d1(k))"] == "(1+0*I)"
    assert texts["F(Delta1,Delta2)((d1(k)*k^-1)*(k^-1*d1(k)))"] == "(1+0*I)"
    assert {a.fun for a in g.terms} == {"f1", "f2", "F"}


def test_grouped_forms_antisymmetric_pair(radial):
    g = collect_to_basis(radial[FORMS], FORMS)
    texts = {a.text(): c.text() for a, c in g.items()}
    assert texts["L(Delta1,Delta2)((d1(k)*k^-1)*(k^-1*d2(k)))"] == "(0-1*I)*t2"
    assert texts["L(Delta1,Delta2)((d2(k)*k^-1)*(k^-1*d1(k)))"] == "(0+1*I)*t2"
    assert {a.fun for a in g.terms} == {"g1", "g2", "G", "L"}


def test_grouped_empty():
    assert not collect_to_basis(ModularExpr(), FUNCTIONS)


def test_assembled_basis_is_exact(radial):
    for half, names in ((FUNCTIONS, ("f1", "f2", "F")), (FORMS, ("g1", "g2", "G", "L"))):
        got = reduce.assemble_basis_functions(radial[half], half)
        for n in names:
            assert modfun.normal_equal(got[n], modfun.closed_form(n)), n


def test_F_printed_D_combination(radial):
    """F also equals the printed D-combination (u, v) exactly."""
    F = reduce.assemble_basis_functions(radial[FUNCTIONS], FUNCTIONS, register=False)["F"]
    assert modfun.normal_equal(F, modfun.definition("F"))


@pytest.fixture
def temp_fun():
    """Register throwaway two-variable functions for evaluation."""
    added = []

    def put(name, f):
        modfun.registry()[name] = modfun.Entry(name, f.arity, f.view, f, f)
        added.append(name)
        return name

    yield put
    for n in added:
        del modfun.registry()[n]


@pytest.mark.parametrize("q1, q2", [(-1, Fraction(1, 2)), (Fraction(-5, 2), 0), (Fraction(3, 2), -2)])
def test_absorb_decoration_identity(temp_fun, q1, q2):
    """F(D1, D2)(D^a(x) D^b(y)) equals [F u^a v^b](D1, D2)(x y) in the matrix model."""
    rng = np.random.default_rng(2)
    ma = random_assignment(rng, 4, polar=True)
    x, y = (DK(1, 0), Kpow(-1)), (Kpow(-1), DK(0, 1))
    one = ScalarPoly.const(1)
    app = Two("D22", ModWordLetter(Fraction(q1), x), ModWordLetter(Fraction(q2), y))
    (key, mono, part), fun = next(iter(reduce.slot_functions(ModularExpr([(app, one)])).items()))
    assert key == ("two", ModWordLetter(Fraction(0), x), ModWordLetter(Fraction(0), y))
    plain = Two(temp_fun("_absorbed", fun), key[1], key[2])
    a = reduce.eval_modular(ModularExpr([(app, one)]), ma)
    b = reduce.eval_modular(ModularExpr([(plain, one)]), ma)
    assert rel_err(a, b) < 1e-12


@pytest.mark.parametrize("half", [FUNCTIONS, FORMS])
def test_stage_preservation(half):
    rng = np.random.default_rng(7)
    for _ in range(3):
        ma = suites._polar_assignment(rng, 4)
        errs = suites.stage_errors(half, ma)
        assert errs["radial->grouped"] < 1e-10
        assert errs["grouped->log basis"] < 1e-10


def test_decorated_letter_conditioning(temp_fun):
    """Large Delta powers stay accurate when k is far from scalar."""
    rng = np.random.default_rng(1)
    ma = random_assignment(rng, 4, polar=True)
    letter = ModWordLetter(Fraction(-5, 2), (DK(1, 0), Kpow(-1)))
    plain = ModWordLetter(Fraction(0), (DK(1, 0), Kpow(-1)))
    right = ModWordLetter(Fraction(0), (Kpow(-1), DK(0, 1)))
    one = ScalarPoly.const(1)
    a = reduce.eval_modular(ModularExpr([(Two("D31", letter, right), one)]), ma)
    shifted = modfun.ModFun(modfun.definition("D31").expr * modfun.X ** -5, 2, modfun.UV)
    b = reduce.eval_modular(ModularExpr([(Two(temp_fun("_D31_shift", shifted), plain, right), one)]), ma)
    assert rel_err(a, b) < 1e-12


def test_radial_quadrature_oracle():
    rng = np.random.default_rng(9)
    ma = suites._polar_assignment(rng, 3)
    assert suites.radial_quadrature_error(FUNCTIONS, ma) < 1e-6


def test_angular_quadrature_oracle():
    rng = np.random.default_rng(9)
    ma = suites._polar_assignment(rng, 3)
    assert suites.angular_quadrature_error(FORMS, ma) < 1e-8
