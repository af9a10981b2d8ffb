import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf
from sympy import divisor_count, factorint, primerange

from zagier_check.divisors import PUBLISHED_L_VALUE
from zagier_check.l_series import (
    PSI,
    CoefficientTable,
    asymptotic_threshold,
    bessel_k0,
    bessel_k1,
    cached_coefficients,
    count_points,
    frobenius_trace,
    g0,
    g0_eval,
    hecke_coefficients,
    lambda_at_zero,
    local_factor_from_counts,
    lvalue_second,
)
from zagier_check.quad_fields import KElement, primes_above

D = 40


def tol(e):
    return mpf(10) ** e


@pytest.fixture(scope="module")
def coeffs():
    return hecke_coefficients(30000)


def test_small_coefficients(coeffs):
    assert coeffs[1] == 1
    assert coeffs[2] == 0
    assert coeffs[3] == 0
    assert coeffs[4] == -4


def test_multiplicative(coeffs):
    for m in range(1, 60):
        for n in range(1, 60):
            if math.gcd(m, n) == 1:
                assert coeffs[m * n] == coeffs[m] * coeffs[n]


def test_support_on_principal_norms(coeffs):
    # a_n = 0 unless n is a norm from some ideal in the principal class (times squares of inert primes)
    from zagier_check.quad_fields import k_principal_ideals

    norms = {n for _, n in k_principal_ideals(200)}
    for n in range(1, 200):
        f = factorint(n)
        if all(p in (5, 7) or e % 2 == 0 for p, e in f.items()):
            continue
        if coeffs[n]:
            assert any(n % m == 0 and m > 1 for m in norms)


def test_ramanujan_bound(coeffs):
    for n in range(1, 10001):
        assert abs(coeffs[n]) <= divisor_count(n) ** 2 * math.sqrt(n)


def test_hasse_bound():
    for p in primerange(2, 120):
        if p in (5, 7):
            continue
        for v in primes_above(p):
            assert abs(frobenius_trace(v)) <= 2 * math.sqrt(v.residue_field_size)


def test_point_count_small_fields():
    v2 = primes_above(2)[0]
    assert v2.residue_field_size == 4
    assert count_points(v2) == 5 - frobenius_trace(v2)
    with pytest.raises(ValueError):
        count_points(primes_above(7)[0])


def test_local_factors_match_point_counts():
    for p in primerange(2, 1000):
        if p in (5, 7):
            continue
        if max(v.residue_field_size for v in primes_above(p)) >= 1000:
            continue
        assert PSI.local_factor(p) == local_factor_from_counts(p), p


def test_hecke_character_unit_invariance():
    alpha = KElement(1, 1)
    assert PSI(-alpha) == PSI(alpha)


def test_coefficient_cache_roundtrip(tmp_path):
    a = cached_coefficients(500, tmp_path)
    b = cached_coefficients(500, tmp_path)
    assert a == b == hecke_coefficients(500)
    assert CoefficientTable.from_json(a.to_json()) == a


# Bessel functions


def test_k0_reference_values():
    with mpmath.workdps(D + 10):
        assert abs(bessel_k0(1, D) - mpf("0.421024438240708333335627379212609036136219748")) < tol(-D + 5)
        ref10 = mpf("0.0000177800623161676518113011927994927923128734702")
        assert abs(bessel_k0(10, D) - ref10) < tol(-D + 5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 70))
def test_k0_k1_against_mpmath(x):
    with mpmath.workdps(D + 10):
        assert abs(bessel_k0(x, D) - mpmath.besselk(0, x)) < tol(-D + 5)
        assert abs(bessel_k1(x, D) - mpmath.besselk(1, x)) < tol(-D + 5)


def test_k0_positive_decreasing():
    vals = [bessel_k0(x, D) for x in (4, 5, 6)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_g0_reference_value():
    with mpmath.workdps(D + 10):
        # adaptive quadrature of K0(t)/t on [1, oo)
        assert abs(g0(1, D) - mpf("0.208518290900129492738253639822978444298728218")) < tol(-D + 5)


def test_g0_regimes():
    assert g0_eval(2, D).regime == "series"
    assert g0_eval(10, D).regime == "grid"
    assert g0_eval(60, D).regime == "asymptotic"
    assert asymptotic_threshold(D) >= 15


@pytest.mark.parametrize("x", ["3.5", "7.25", "14.9", "15.1", "33", "45.5", "60.2"])
def test_g0_against_quadrature(x):
    with mpmath.workdps(D + 15):
        x = mpf(x)
        ref = mpmath.quad(lambda t: mpmath.besselk(0, t) / t, [x, x + 1, x + 5, x + 20, mpmath.inf])
        assert abs(g0(x, D) - ref) < tol(-D + 5)


def test_g0_continuity_at_breakpoints():
    with mpmath.workdps(D + 10):
        for b in (3, asymptotic_threshold(D)):
            b = mpf(b)
            lo, hi = g0_eval(b - mpf("0.001"), D), g0_eval(b + mpf("0.001"), D)
            assert lo.regime != hi.regime
            # both sides against one regime's derivative: G0' = -K0/x
            mid = (lo.value + hi.value) / 2
            assert abs(hi.value - lo.value + mpf("0.002") * bessel_k0(b, D) / b) < tol(-8)
            for regime in ("series", "grid") if b == 3 else ("grid", "asymptotic"):
                assert abs(g0_eval(b, D, regime).value - g0_eval(b, D).value) < tol(-D + 5)
            assert mid > 0


def test_g0_monotone_tail():
    assert g0(40, D) < 1e-18
    assert g0(20, D) > g0(21, D) > g0(22, D)


def test_g0_derivative():
    # central difference with step h has error h^2 G0'''/6; h = 1e-26 keeps it far below 10^(-D/2)
    with mpmath.workdps(2 * D + 20):
        h = mpf(10) ** -26
        for i in range(20):
            x = mpf("0.4") + mpf(i) * mpf("3.1")
            fd = (g0(x + h, 2 * D) - g0(x - h, 2 * D)) / (2 * h)
            assert abs(fd + bessel_k0(x, 2 * D) / x) < tol(-D // 2)


# value at s = 0


@pytest.fixture(scope="module")
def lvalue(coeffs):
    return lvalue_second(30000, D, coeffs)


def test_lvalue_matches_printed_digits(lvalue):
    with mpmath.workdps(60):
        rel = abs(lvalue.value - mpf(PUBLISHED_L_VALUE)) / mpf(PUBLISHED_L_VALUE)
        assert rel < tol(-20)
    assert lvalue.sign == 1


def test_split_point_independence(lvalue, coeffs):
    with mpmath.workdps(D + 10):
        other = lambda_at_zero(coeffs, D, mpf("1.21"), 1)
        assert abs(other - lvalue.value) < tol(-D + 10) + tol(-20)
    assert lvalue.wrong_sign_shift > 1


def test_halving_coefficient_bound(lvalue):
    half = lvalue_second(15000, D)
    with mpmath.workdps(D + 10):
        assert abs(half.value - lvalue.value) < tol(-15)
