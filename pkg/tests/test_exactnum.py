import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorkin import exactnum as ex
from tensorkin.exactnum import ONE, PI, SQRT_PI, ZERO, DomainError, ExactReal

half_ints = st.integers(min_value=-15, max_value=30).map(lambda k: Fraction(k, 2))
rationals = st.builds(Fraction, st.integers(-300, 300), st.integers(1, 40))


def elems():
    return st.builds(lambda a, b, c: ExactReal({Fraction(0): a, Fraction(1, 2): b, Fraction(-1): c}),
                     rationals, rationals, rationals)


@settings(max_examples=200, deadline=None)
@given(elems(), elems(), elems())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == ZERO
    assert a * ONE == a


@settings(max_examples=200, deadline=None)
@given(elems(), elems())
def test_float_conversion_is_a_homomorphism(a, b):
    assert math.isclose(float(a * b), float(a) * float(b), rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(float(a + b), float(a) + float(b), rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=100, deadline=None)
@given(elems(), elems())
def test_sign_and_order_match_floats(a, b):
    d = float(a) - float(b)
    if abs(d) > 1e-9:
        assert (a < b) == (d < 0)
        assert (a - b).sign() == (1 if d > 0 else -1)


def test_monomial_division_and_powers():
    x = ExactReal.pi_power(Fraction(3, 2), Fraction(2, 3))
    assert x / x == ONE
    assert (SQRT_PI ** 2) == PI
    assert x ** -2 * x ** 2 == ONE


def test_division_by_polynomial_is_rejected():
    with pytest.raises(DomainError):
        ONE / (ONE + PI)
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


@settings(max_examples=150, deadline=None)
@given(half_ints)
def test_gamma_matches_mpmath(x):
    if x.denominator == 1 and x <= 0:
        with pytest.raises(DomainError):
            ex.gamma(x)
        assert ex.rgamma(x) == ZERO
        return
    want = mpmath.gamma(mpmath.mpf(x.numerator) / x.denominator)
    assert math.isclose(float(ex.gamma(x)), float(want), rel_tol=1e-12)


def test_gamma_half_exact_values():
    assert ex.gamma(Fraction(1, 2)) == SQRT_PI
    assert ex.gamma(Fraction(5, 2)) == ExactReal.rational(Fraction(3, 4)) * SQRT_PI
    assert ex.gamma(Fraction(-1, 2)) == ExactReal.rational(-2) * SQRT_PI
    with pytest.raises(DomainError):
        ex.gamma_half(0)


def test_gamma_ratio_continuation():
    # pole in both: Γ(-2)/Γ(-4) = (-4)(-3) = 12 by the limit
    assert ex.gamma_ratio(-2, -4) == ExactReal.rational(12)
    assert ex.gamma_ratio(3, 0) == ZERO
    with pytest.raises(DomainError):
        ex.gamma_ratio(0, 3)
    assert ex.gamma_ratio(Fraction(7, 2), Fraction(3, 2)) == ExactReal.rational(Fraction(15, 4))


@pytest.mark.parametrize("c", [Fraction(5, 2), Fraction(-3, 2), Fraction(1, 3)])
@pytest.mark.parametrize("m", range(5))
def test_gamma_ratio_continued_matches_mpmath_where_defined(c, m):
    got = float(ex.gamma_ratio_continued(c, m))
    x = mpmath.mpf(c.numerator) / c.denominator
    want = float(mpmath.gamma(m - x) / mpmath.gamma(-x))
    assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-14)


def test_rising_ratio_reads_through_poles():
    assert ex.rising_ratio_l(0, 0) == 1
    assert ex.rising_ratio_l(1, 0) == -1
    assert ex.rising_ratio_l(2, 0) == 0
    assert ex.rising_ratio_l(3, 1) == 0
    assert ex.rising_ratio_l(2, 3) == 2 * 3


@pytest.mark.parametrize("n", range(1, 9))
def test_sphere_and_ball_constants(n):
    assert math.isclose(float(ex.omega(n)), 2 * math.pi ** (n / 2) / math.gamma(n / 2), rel_tol=1e-13)
    assert math.isclose(float(ex.kappa(n)), math.pi ** (n / 2) / math.gamma(n / 2 + 1), rel_tol=1e-13)
    assert ex.omega(n) == ExactReal.rational(n) * ex.kappa(n)


def test_principal_kinematic_constant_in_the_plane():
    c = ex.c_kinematic(ex.CoeffIndex(2, 0, 1, 0, 0, 0, 0))
    assert str(c) == "2/1 * pi^(-1)"
    assert c == ex.alpha_njk(2, 0, 1)
    assert math.isclose(float(c), 2 / math.pi)


@pytest.mark.parametrize("n", range(2, 7))
def test_alpha_against_float_gamma(n):
    for j in range(n + 1):
        for k in range(j, n + 1):
            want = (math.gamma((k + 1) / 2) * math.gamma((n - k + j + 1) / 2)
                    / (math.gamma((j + 1) / 2) * math.gamma((n + 1) / 2)))
            assert math.isclose(float(ex.alpha_njk(n, j, k)), want, rel_tol=1e-12)


def test_normalizing_constant_examples():
    for n in range(2, 5):
        for j in range(n):
            for s in range(3):
                want = (1 / math.factorial(s) * float(ex.omega(n - j)) / float(ex.omega(n - j + s)))
                assert math.isclose(float(ex.c_normalizing(n, j, 0, s, 0)), want, rel_tol=1e-12)
    assert ex.c_normalizing(3, 0, 0, 0, 2) == ONE


def test_merged_top_constant_vanishes_for_odd_s():
    assert ex.c_nj_s(3, 1, 1) == ZERO
    assert ex.c_nj_s(3, 1, 0) == ONE


def test_d_coefficient_trivial_cases():
    for n in range(1, 6):
        for k in range(n + 1):
            assert ex.d_coeff(n, k, k) == ONE
    with pytest.raises(DomainError):
        ex.d_coeff(3, 2, 1)


def test_e_coefficient_for_a_zero_is_one():
    for n in range(1, 6):
        for k in range(n + 1):
            for r in range(n - k, n + 1):
                assert ex.e_coeff(n, k, r, 0) == ONE
    with pytest.raises(DomainError):
        ex.e_coeff(4, 1, 1, 2)


@pytest.mark.parametrize("suite", ["A1", "A2", "legendre"])
def test_identity_families_small(suite):
    rep = ex.identity_suite(suite, max_q=6, max_s_a2=5, max_2c=12)
    assert rep.results and rep.passed, [r.to_json() for r in rep.failures[:3]]


def test_pipeline_small_range():
    rep = ex.identity_suite("pipeline", max_n=4, max_s=3, max_l=2)
    assert rep.results and rep.passed


def test_unknown_suite():
    with pytest.raises(DomainError):
        ex.identity_suite("nope")


def test_pipeline_assembly_equals_closed_form():
    for (n, j, k) in [(3, 1, 2), (4, 1, 3), (5, 2, 3)]:
        for s in range(4):
            for l in range(3):
                for m in range(s // 2 + 1):
                    for i in range(m + 1):
                        pc = ex.pipeline_coeffs(n, j, k, s, l, i, m)
                        assert pc.c_assembled == ex.c_kinematic(ex.CoeffIndex(n, j, k, s, l, i, m))
