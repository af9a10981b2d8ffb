from fractions import Fraction

import mpmath
import pytest
from mpmath import mpf

from zagier_check.curve_group import P, Q, POINT_INDEX, combo, double
from zagier_check.local_heights import (
    arch_height,
    arch_height_tate,
    canonical_height,
    component_correction,
    naive_doubling_height,
    nonarch_multiplier,
    nonarch_multiplier_by_doubling,
    on_identity_component,
    relevant_places,
    support_scan,
)
from zagier_check.quad_fields import REAL_PLACES, place_from_label, primes_above

D = 100
# from Tate's series plus the doubling recursion at 60 digits
H_P = "0.284058016116556776606150761703812306993778893"
H_Q = "0.629868135368916862256178422283457124504914739"


def tol(e):
    return mpf(10) ** e


def test_support_characteristics(table):
    assert {v.residue_char for v in support_scan(table)} == {2, 5, 7, 11, 59}


def test_integral_rows_only_bad_places(table):
    places = support_scan(table, POINT_INDEX[:14])
    assert {v.label for v in places} == {"sqrt5", "7"}


def test_rows_with_denominator_59(table):
    for kl in [(1, -2), (4, 4), (5, 2)]:
        labels = {v.label for v in support_scan(table, [kl])}
        assert "59:w=26" in labels


def test_multiplier_examples(table):
    sqrt5, seven = place_from_label("sqrt5"), place_from_label("7")
    # v(x) = -2 at sqrt5 plus v(Delta)/12 = 1/2
    assert nonarch_multiplier(table[(1, -1)], sqrt5) == Fraction(3, 2)
    assert nonarch_multiplier(P, place_from_label("11:w=8")) == 0
    # P is off the identity component at 7; the correction cancels v(Delta)/12 there
    assert not on_identity_component(P, seven)
    assert component_correction(P, seven) == Fraction(-1, 4)
    assert nonarch_multiplier(P, seven) == 0
    assert (12 * component_correction(P, seven)).denominator == 1


def test_multipliers_against_doubling_oracle(table):
    for kl in POINT_INDEX:
        for v in relevant_places(table[kl]):
            assert nonarch_multiplier(table[kl], v) == nonarch_multiplier_by_doubling(table[kl], v)


def test_good_integral_points_have_zero_multiplier(table):
    for kl in POINT_INDEX[:14]:
        for ell in (2, 11, 59):
            for v in primes_above(ell):
                assert nonarch_multiplier(table[kl], v) == 0


def test_arch_height_matches_tate_series(table):
    with mpmath.workdps(D + 10):
        for kl in [(0, 1), (1, -1), (6, 0), (5, 4)]:
            for place in REAL_PLACES:
                diff = arch_height(table[kl], place, D) - arch_height_tate(table[kl], place, D)
                assert abs(diff) < tol(-D + 5)


def test_arch_height_stable_under_precision():
    with mpmath.workdps(130):
        for place in REAL_PLACES:
            assert abs(arch_height(Q, place, D) - arch_height(Q, place, D + 20)) < tol(-D + 5)


def test_quasi_parallelogram():
    # lambda(P+Q) + lambda(P-Q) = 2 lambda(P) + 2 lambda(Q) - log|x(P) - x(Q)| + log|Delta|/6
    from zagier_check.curve_group import CURVE
    from zagier_check.quad_fields import embed

    with mpmath.workdps(D + 10):
        for place in REAL_PLACES:
            lhs = arch_height(P + Q, place, D) + arch_height(P - Q, place, D)
            rhs = 2 * arch_height(P, place, D) + 2 * arch_height(Q, place, D)
            dx = embed(P.x - Q.x, place, D + 10)
            disc = embed(CURVE.discriminant, place, D + 10)
            assert abs(lhs - rhs + mpmath.log(abs(dx)) - mpmath.log(abs(disc)) / 6) < tol(-D + 5)


def test_arch_doubling_relation():
    from zagier_check.curve_group import CURVE
    from zagier_check.quad_fields import embed

    with mpmath.workdps(D + 10):
        for place in REAL_PLACES:
            psi2 = embed(2 * Q.y + CURVE.a1 * Q.x + CURVE.a3, place, D + 10)
            disc = embed(CURVE.discriminant, place, D + 10)
            lhs = arch_height(double(Q), place, D)
            rhs = 4 * arch_height(Q, place, D) - mpmath.log(abs(psi2)) + mpmath.log(abs(disc)) / 4
            assert abs(lhs - rhs) < tol(-D + 5)


def test_local_sum_equals_canonical_height_all_points(table):
    with mpmath.workdps(D + 10):
        for kl in POINT_INDEX:
            a = canonical_height(table[kl], D, "local")
            b = canonical_height(table[kl], D, "doubling")
            assert abs(a - b) < tol(-D // 2)
            assert a > 0


def test_frozen_heights():
    with mpmath.workdps(D + 10):
        assert abs(canonical_height(P, D) - mpf(H_P)) < tol(-44)
        assert abs(canonical_height(Q, D) - mpf(H_Q)) < tol(-44)


def test_naive_doubling_limit_is_close():
    # the classical limit converges like 4^-n; only a coarse check is feasible
    assert abs(naive_doubling_height(P, 6) - mpf(H_P)) < 1e-3
    assert abs(naive_doubling_height(Q, 6) - mpf(H_Q)) < 1e-3


def test_quadraticity():
    with mpmath.workdps(D + 10):
        assert abs(canonical_height(double(P), D) - 4 * canonical_height(P, D)) < tol(-D + 5)
        lhs = canonical_height(P + Q, D) + canonical_height(P - Q, D)
        assert abs(lhs - 2 * canonical_height(P, D) - 2 * canonical_height(Q, D)) < tol(-D + 5)


def test_height_of_identity():
    assert canonical_height(combo(0, 0)) == 0
    with pytest.raises(ValueError):
        nonarch_multiplier(combo(0, 0), place_from_label("7"))


def test_height_matrix_json(heights):
    data = heights.to_json()
    assert data["finite"]["sqrt5"]["q_v"] == 5
    assert data["finite"]["sqrt5"]["multipliers"]["1,-1"] == "3/2"
    assert data["arch"]["real1"]["precision_digits"] == D
