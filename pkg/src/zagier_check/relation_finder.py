"""Exact and archimedean linear constraints on divisors supported on the 22 points.

Two stages: the cubic-moment and finite-height rows are exact integers, so
their kernel is found with Hermite normal form over Z.  The two archimedean
rows are only known numerically; relations against them are found by LLL
on the exact kernel, augmented by the scaled archimedean values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .curve_group import POINT_INDEX, PointTable
from .divisors import WeightedDivisor
from .local_heights import HeightMatrix
from .periods_dilog import GUARD
from .quad_fields import REAL_PLACES

Matrix = list[list[int]]


# ---------------------------------------------------------------------------
# exact integer linear algebra
# ---------------------------------------------------------------------------


def hermite_normal_form(rows: Matrix) -> Matrix:
    """Row-style HNF: echelon, positive pivots, entries above pivots reduced.

    Zero rows are dropped, so the result is a basis of the row lattice.
    """
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    out = []
    col = 0
    while a and col < ncols:
        nz = [r for r in a if r[col]]
        if not nz:
            col += 1
            continue
        # Euclid on the column among the rows with nonzero entries
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            rest = []
            for r in nz[1:]:
                f = r[col] // piv[col]
                for j in range(col, ncols):
                    r[j] -= f * piv[j]
                if r[col]:
                    rest.append(r)
            nz = [piv] + rest
        piv = nz[0]
        if piv[col] < 0:
            piv[:] = [-x for x in piv]
        a = [r for r in a if r is not piv and any(r)]
        out.append(piv)
        col += 1
    # reduce entries above each pivot
    for i, r in enumerate(out):
        c = next(j for j, x in enumerate(r) if x)
        for k in range(i):
            f = out[k][c] // r[c]
            if f:
                out[k] = [x - f * y for x, y in zip(out[k], r)]
    return out


def integer_kernel(rows: Matrix, ncols: int | None = None) -> Matrix:
    """Basis of {a in Z^n : rows . a = 0}, the full (saturated) kernel lattice.

    Column operations are tracked in a unimodular U with rows.U echelon; the
    columns of U beyond the rank span the kernel.
    """
    if ncols is None:
        if not rows:
            raise ValueError("ncols is required for an empty matrix")
        ncols = len(rows[0])
    # work with transposes: columns of M become rows of an augmented matrix [M^T | I]
    aug = [[rows[i][j] for i in range(len(rows))] + [int(j == k) for k in range(ncols)] for j in range(ncols)]
    m = len(rows)
    rank = 0
    for i in range(m):
        nz = [r for r in aug[rank:] if r[i]]
        if not nz:
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[i]))
            piv = nz[0]
            rest = []
            for r in nz[1:]:
                f = r[i] // piv[i]
                for j in range(len(r)):
                    r[j] -= f * piv[j]
                if r[i]:
                    rest.append(r)
            nz = [piv] + rest
        piv = nz[0]
        aug.remove(piv)
        aug.insert(rank, piv)
        rank += 1
    kernel = [r[m:] for r in aug[rank:]]
    return hermite_normal_form(kernel) if kernel else []


def lattice_rank(rows: Matrix) -> int:
    return len(hermite_normal_form(rows))


def in_lattice(vec, basis: Matrix) -> bool:
    """Exact membership of an integer vector in the row lattice of ``basis``."""
    h = hermite_normal_form(basis)
    v = list(vec)
    for r in h:
        c = next(j for j, x in enumerate(r) if x)
        if v[c] % r[c]:
            return False
        f = v[c] // r[c]
        if f:
            v = [x - f * y for x, y in zip(v, r)]
    return not any(v)


def is_saturated(basis: Matrix) -> bool:
    """True when no b/p outside the lattice lies in its rational span.

    Tested by comparing the HNF of the lattice with that of its saturation
    (kernel of the kernel).
    """
    if not basis:
        return True
    n = len(basis[0])
    sat = integer_kernel(integer_kernel(basis, n), n)
    return hermite_normal_form(sat) == hermite_normal_form(basis)


def same_lattice(a: Matrix, b: Matrix) -> bool:
    return hermite_normal_form(a) == hermite_normal_form(b)


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------


def lll_reduce(basis: Matrix, delta: Fraction = Fraction(99, 100)) -> Matrix:
    """Exact-rational LLL on integer row vectors (small dimension only)."""
    b = [list(r) for r in basis]
    n = len(b)
    if n == 0:
        return b

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt():
        bstar, mu, norms = [], [[Fraction(0)] * n for _ in range(n)], []
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = Fraction(dot(b[i], bstar[j])) / norms[j] if norms[j] else Fraction(0)
                v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
            bstar.append(v)
            norms.append(dot(v, v))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for i in range(j + 1):
                    mu[k][i] -= q * (mu[j][i] if i < j else 1)
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return b


# ---------------------------------------------------------------------------
# the constraint system
# ---------------------------------------------------------------------------


@dataclass
class ConstraintSystem:
    cubic_rows: Matrix
    finite_rows: dict[str, Matrix]  # place label -> [k-row, l-row], integers
    finite_scale: dict[str, int]  # denominators cleared per place
    arch_rows: dict[int, list[list[mpf]]]  # real place index -> [k-row, l-row]
    dps: int
    index: tuple[tuple[int, int], ...] = field(default=POINT_INDEX)

    @property
    def exact_rows(self) -> Matrix:
        rows = list(self.cubic_rows)
        for lab in self.finite_rows:
            rows.extend(self.finite_rows[lab])
        return rows

    def to_json(self):
        return {
            "index": [list(kl) for kl in self.index],
            "cubic_rows": self.cubic_rows,
            "finite_rows": {
                lab: {"denominator_cleared": self.finite_scale[lab], "rows": rows}
                for lab, rows in self.finite_rows.items()
            },
            "arch_rows": {
                f"real{idx}": {
                    "precision_digits": self.dps,
                    "rows": [[mpmath.nstr(x, self.dps) for x in row] for row in rows],
                }
                for idx, rows in self.arch_rows.items()
            },
        }


def cubic_rows(index=POINT_INDEX) -> Matrix:
    return [[k ** (3 - j) * l ** j for (k, l) in index] for j in range(4)]


def build_system(table: PointTable, heights: HeightMatrix) -> ConstraintSystem:
    index = tuple(table)
    finite_rows, finite_scale = {}, {}
    for lab, row in heights.finite.items():
        vals = [row[kl] for kl in index]
        if not any(vals):
            continue
        den = math.lcm(*(r.denominator for r in vals))
        ints = [int(r * den) for r in vals]
        finite_rows[lab] = [
            [x * k for x, (k, _) in zip(ints, index)],
            [x * l for x, (_, l) in zip(ints, index)],
        ]
        finite_scale[lab] = den
    arch_rows = {}
    with mpmath.workdps(heights.dps + GUARD):
        for idx, row in heights.arch.items():
            vals = [row[kl] for kl in index]
            arch_rows[idx] = [
                [x * k for x, (k, _) in zip(vals, index)],
                [x * l for x, (_, l) in zip(vals, index)],
            ]
    return ConstraintSystem(cubic_rows(index), finite_rows, finite_scale, arch_rows, heights.dps, index)


def _apply(row, vec):
    return sum(x * a for x, a in zip(row, vec) if a)


def arch_functionals(system: ConstraintSystem, vec, place_index: int):
    with mpmath.workdps(system.dps + GUARD):
        return [_apply(r, vec) for r in system.arch_rows[place_index]]


@dataclass(frozen=True)
class ResidualReport:
    exact: list[int]
    arch: dict[int, list[mpf]]

    @property
    def exact_ok(self) -> bool:
        return not any(self.exact)

    def max_arch(self) -> mpf:
        return max((abs(x) for v in self.arch.values() for x in v), default=mpf(0))

    def to_json(self, digits: int = 10):
        return {
            "exact": self.exact,
            "arch": {f"real{k}": [mpmath.nstr(x, digits) for x in v] for k, v in self.arch.items()},
        }


def verify_divisor(div: WeightedDivisor | list[int], system: ConstraintSystem) -> ResidualReport:
    vec = div.coefficients if isinstance(div, WeightedDivisor) else tuple(div)
    exact = [_apply(r, vec) for r in system.exact_rows]
    arch = {idx: arch_functionals(system, vec, idx) for idx in system.arch_rows}
    return ResidualReport(exact, arch)


class LatticePrecisionError(RuntimeError):
    """Too few short vectors: precision or scale exponent is misconfigured."""


@dataclass(frozen=True)
class RelationLattice:
    basis: Matrix  # integer vectors in Z^22
    residuals: list[mpf]
    kernel_rank: int
    place_index: int
    scale_exponent: int

    @property
    def rank(self) -> int:
        return len(self.basis)

    def contains(self, vec) -> bool:
        return in_lattice(vec, self.basis)


def integral_relations(
    kernel_basis: Matrix,
    system: ConstraintSystem,
    scale_exponent: int = 60,
    place_index: int = 1,
    expected_rank: int = 8,
) -> RelationLattice:
    """Sublattice of the exact kernel killed by the arch rows at one real place."""
    dps = system.dps
    if scale_exponent >= dps - 30:
        raise ValueError("scale exponent must stay below precision - 30")
    n = len(kernel_basis)
    with mpmath.workdps(dps + 10):
        scale = mpf(10) ** scale_exponent
        funcs = [arch_functionals(system, b, place_index) for b in kernel_basis]
        scaled = [[int(mpmath.nint(scale * f)) for f in fs] for fs in funcs]
    aug = [[int(i == j) for j in range(n)] + scaled[i] for i in range(n)]
    reduced = lll_reduce(aug)
    threshold = mpf(10) ** (scale_exponent - dps + 10)
    found, residuals = [], []
    for row in reduced:
        coeffs = row[:n]
        vec = [sum(c * b[j] for c, b in zip(coeffs, kernel_basis)) for j in range(len(kernel_basis[0]))]
        res = max(abs(x) for x in arch_functionals(system, vec, place_index))
        if res < threshold:
            found.append(vec)
            residuals.append(res)
    if len(found) < min(expected_rank, n):
        raise LatticePrecisionError(
            f"only {len(found)} relations below {mpmath.nstr(threshold, 3)}; raise precision or lower the scale"
        )
    return RelationLattice(found, residuals, n, place_index, scale_exponent)


def degree_sums(vec, index=POINT_INDEX) -> tuple[int, int]:
    """(sum a k, sum a l); reported, never imposed."""
    return (sum(a * k for a, (k, _) in zip(vec, index)), sum(a * l for a, (_, l) in zip(vec, index)))


def place_dependence(kernel_basis: Matrix, system: ConstraintSystem) -> mpf:
    """max over kernel basis of |f_1 + f_2|: the arch rows at the two places are opposite there."""
    worst = mpf(0)
    with mpmath.workdps(system.dps + GUARD):
        for b in kernel_basis:
            f1 = arch_functionals(system, b, REAL_PLACES[0].index)
            f2 = arch_functionals(system, b, REAL_PLACES[1].index)
            worst = max(worst, *(abs(x + y) for x, y in zip(f1, f2)))
    return worst
