from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nctorus import logform, modfun
from nctorus.coeffring import ScalarPoly
from nctorus.logform import BIL, LIN, LogBasisExpr, assemble_curvature, k_to_log
from nctorus.modfun import LU, ST, X, ModFun, at_sum, exp_view, normal_equal
from nctorus.ncsymbol import DK, Kpow, random_assignment
from nctorus.reduce import ModularExpr, ModWordLetter, One, UnmatchedTarget

ONE = (0, 0, 0, 0, 0)
T2 = (0, 0, 0, 0, 1)


@pytest.fixture(scope="module")
def halves():
    return {h: logform.half_log_basis(h) for h in ("functions", "forms")}


@pytest.fixture(scope="module")
def slots():
    return logform.pipeline_curvature(register=True)


def single_f1():
    app = One("f1", ModWordLetter(Fraction(0), (Kpow(-1), DK(2, 0))))
    return ModularExpr([(app, ScalarPoly.const(1))])


def test_empty():
    assert not k_to_log(ModularExpr())


def test_f1_contributions():
    lb = k_to_log(single_f1())
    f1 = exp_view(modfun.closed_form("f1"))
    a = ModFun((X - 1) / LU, 1, ST)
    g = exp_view(modfun.closed_form("g"))
    # overall factor -1 of the recipe
    assert normal_equal(lb.get((LIN, 1, 1), ONE), f1 * a * -2)
    assert normal_equal(lb.get((BIL, 1, 1), ONE), at_sum(f1) * g * -2)
    assert len(lb) == 2


def test_K_from_f1(halves):
    assert normal_equal(halves["functions"].decompose()["linear"], modfun.closed_form("K"))


def test_unknown_target_rejected():
    app = One("f1", ModWordLetter(Fraction(0), (Kpow(-1), DK(3, 0))))
    with pytest.raises(UnmatchedTarget):
        k_to_log(ModularExpr([(app, ScalarPoly.const(1))]))


def test_decompose_checks_linear_ratios(halves):
    lb = halves["functions"]
    broken = LogBasisExpr(dict(lb.terms), lb.prefactor)
    key = next(k for k in broken.terms if k[0] == (LIN, 2, 2))
    broken.terms[key] = broken.terms[key] * 2
    with pytest.raises(UnmatchedTarget):
        broken.decompose()


def test_decompose_rejects_extra_target(halves):
    lb = LogBasisExpr(dict(halves["functions"].terms))
    lb.add((BIL, 1, 1), (0, 0, 0, 1, 1), "re", ModFun(X, 2, ST))
    with pytest.raises(UnmatchedTarget):
        lb.decompose()


@pytest.mark.parametrize("group, slot, name", [
    ("functions", "linear", "K"), ("functions", "bilinear", "H"),
    ("forms", "linear", "S"), ("forms", "bilinear", "T"), ("forms", "antisym", "W"),
    ("ungraded", "linear", "R1"), ("ungraded", "bilinear", "R2"), ("ungraded", "antisym", "W"),
    ("graded", "linear", "R1g"), ("graded", "bilinear", "R2g"),
])
def test_curvature_slots_exact(slots, group, slot, name):
    assert normal_equal(slots[group][slot], modfun.closed_form(name))


def test_graded_W_sign(slots):
    assert normal_equal(slots["graded"]["antisym"], modfun.closed_form("W") * -1)


def test_functions_half_has_no_antisymmetric_part(slots):
    assert slots["functions"]["antisym"].is_zero()


def test_W_appears_only_antisymmetrically(halves):
    lb = halves["forms"]
    im = {k: f for k, f in lb.terms.items() if k[2] == "im"}
    assert {k[0] for k in im} == {(BIL, 1, 2), (BIL, 2, 1)}
    assert normal_equal(im[((BIL, 1, 2), T2, "im")], im[((BIL, 2, 1), T2, "im")] * -1)


def test_sum_and_difference_have_no_leftovers(halves):
    for graded in (False, True):
        lb = assemble_curvature(halves["functions"], halves["forms"], graded)
        lb.decompose()


def test_pipeline_registers_assembled(slots):
    for name in ("K", "H", "S", "T", "W", "R1", "R2", "R1g", "R2g"):
        assert modfun.verify(name)["assembled_equals_closed"], name


def test_R2_numeric_against_printed(slots):
    rng = np.random.default_rng(8)
    R2 = slots["ungraded"]["bilinear"]
    for s, t in rng.uniform(-4, 4, (100, 2)):
        want = modfun.printed_numeric("R2", (s, t))[0]
        got = modfun.evaluate(R2, (s, t))
        assert abs(got - want) <= 1e-12 * max(abs(want), 1e-300)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 5))
def test_lemma_identities_matrix_model(seed, dim):
    ma = random_assignment(np.random.default_rng(seed), dim)
    res = logform.lemma_matrix_residuals(ma)
    assert max(res.values()) < 1e-9, res


def test_eval_logbasis_of_single_f1_term():
    """-f1(D)(k^-1 d1^2 k) equals its log-basis rewrite in the matrix model."""
    from nctorus import reduce
    ma = random_assignment(np.random.default_rng(4), 4)
    lhs = -reduce.eval_modular(single_f1(), ma)
    rhs = logform.eval_logbasis(k_to_log(single_f1()), ma)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()
