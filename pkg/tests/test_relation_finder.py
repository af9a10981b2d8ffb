import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mpf

from zagier_check.divisors import TABLE2_DIVISORS, ZERO_DIVISOR, WeightedDivisor
from zagier_check.relation_finder import (
    ConstraintSystem,
    LatticePrecisionError,
    cubic_rows,
    degree_sums,
    hermite_normal_form,
    in_lattice,
    integer_kernel,
    integral_relations,
    is_saturated,
    lattice_rank,
    lll_reduce,
    place_dependence,
    same_lattice,
    verify_divisor,
)

D = 100
TABLE2 = [list(d.coefficients) for d in TABLE2_DIVISORS]

matrices = st.lists(st.lists(st.integers(-6, 6), min_size=6, max_size=6), min_size=0, max_size=4)


def test_kernel_trivial_cases():
    assert len(integer_kernel([], 22)) == 22
    rows = [[1] + [0] * 21, [0, 1] + [0] * 20]
    k = integer_kernel(rows)
    assert len(k) == 20
    assert all(v[0] == 0 and v[1] == 0 for v in k)


def test_kernel_is_saturated_not_just_rational():
    # 2 a0 + 4 a1 = 0 has kernel spanned by (2, -1), not (4, -2)
    k = integer_kernel([[2, 4]])
    assert hermite_normal_form(k) == [[2, -1]]


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_kernel_properties(rows):
    k = integer_kernel(rows, 6)
    for v in k:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)
    import sympy

    rank = sympy.Matrix(rows).rank() if rows else 0
    assert len(k) == 6 - rank
    assert is_saturated(k)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=4, max_size=4), min_size=1, max_size=4))
def test_lll_preserves_lattice(basis):
    if lattice_rank(basis) < len(basis):
        return
    red = lll_reduce(basis)
    assert same_lattice(red, basis)
    # first vector no longer than the shortest input vector
    assert sum(x * x for x in red[0]) <= min(sum(x * x for x in b) for b in basis)


def test_membership():
    basis = [[2, 0, 0], [0, 3, 0]]
    assert in_lattice([4, -3, 0], basis)
    assert not in_lattice([1, 0, 0], basis)
    assert not in_lattice([0, 0, 1], basis)


def test_cubic_rows_on_table2():
    rows = cubic_rows()
    for col in TABLE2:
        assert all(sum(a * b for a, b in zip(r, col)) == 0 for r in rows)
    # column 1 against sum a k^3
    assert sum(a * b for a, b in zip(rows[0], TABLE2[0])) == 0


def test_system_shape(system):
    assert len(system.cubic_rows) == 4
    assert set(system.finite_rows) == {"2", "sqrt5", "7", "11:w=8", "59:w=26"}
    assert len(system.exact_rows) == 14
    assert set(system.arch_rows) == {1, 2}


def test_exact_kernel_rank(kernel):
    assert len(kernel) == 10
    assert is_saturated(kernel)
    for col in TABLE2:
        assert in_lattice(col, kernel)


def test_verify_divisor(system):
    for div in TABLE2_DIVISORS:
        rep = verify_divisor(div, system)
        assert rep.exact == [0] * 14
        assert rep.max_arch() < mpf(10) ** -80
    unit = verify_divisor(WeightedDivisor.unit((0, 1)), system)
    assert unit.exact[3] == 1  # sum a l^3
    zero = verify_divisor(ZERO_DIVISOR, system)
    assert zero.exact_ok and zero.max_arch() == 0


def test_degree_sums_are_reported_not_imposed():
    sums = [degree_sums(c) for c in TABLE2]
    assert sums[0] == (0, 0)
    assert any(s != (0, 0) for s in sums)


def test_arch_rows_opposite_on_kernel(kernel, system):
    assert place_dependence(kernel, system) < mpf(10) ** (-D + 15)


@pytest.fixture(scope="module")
def lattice(kernel, system):
    return integral_relations(kernel, system, 60, place_index=1)


def test_lll_lattice_contains_table2(lattice):
    assert lattice.rank == 8
    assert all(lattice.contains(c) for c in TABLE2)
    assert same_lattice(lattice.basis, TABLE2)
    assert max(lattice.residuals) < mpf(10) ** -30


def test_other_place_gives_same_lattice(kernel, system, lattice):
    other = integral_relations(kernel, system, 60, place_index=2)
    assert same_lattice(other.basis, lattice.basis)


def test_doubling_precision_gives_same_lattice(kernel, table, lattice):
    from zagier_check.local_heights import height_matrix
    from zagier_check.relation_finder import build_system

    sys2 = build_system(table, height_matrix(table, 2 * D))
    lat2 = integral_relations(kernel, sys2, 120, place_index=1)
    assert same_lattice(lat2.basis, lattice.basis)


def test_zero_arch_rows_return_whole_kernel(kernel, system):
    zero = ConstraintSystem(
        system.cubic_rows,
        system.finite_rows,
        system.finite_scale,
        {1: [[mpf(0)] * 22, [mpf(0)] * 22]},
        D,
    )
    lat = integral_relations(kernel, zero, 60, place_index=1)
    assert lat.rank == 10
    assert same_lattice(lat.basis, kernel)


def test_scale_too_close_to_precision_rejected(kernel, system):
    with pytest.raises(ValueError):
        integral_relations(kernel, system, 80)


def test_no_relations_signals(system):
    # square roots of distinct primes admit no short integer relation
    with mpmath.workdps(D + 20):
        row1 = [mpmath.sqrt(p) for p in (2, 3, 5)] + [mpf(0)] * 19
        row2 = [mpmath.sqrt(p) for p in (7, 11, 13)] + [mpf(0)] * 19
    synthetic = ConstraintSystem(system.cubic_rows, {}, {}, {1: [row1, row2]}, D)
    units = [[int(i == j) for j in range(22)] for i in range(3)]
    with pytest.raises(LatticePrecisionError):
        integral_relations(units, synthetic, 60)
