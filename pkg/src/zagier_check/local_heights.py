"""Local and global canonical heights on the curve.

Normalization: the model-independent local heights, so that at a finite
place v and a point with nonsingular reduction

    lambda_v(P) = (1/2 max(0, -v(x)) + v(Delta)/12) log q_v,

and at a real place lambda(z) = -1/2 B2(Im z/Im tau) log|q| - log|1 - u|
- sum_{n>=1} log|(1 - q^n u)(1 - q^n/u)|.  The sum over all places is the
canonical height, with no 1/[F:Q] factor.

Finite heights are carried as exact rationals r with lambda_v = r log q_v.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpf

from .curve_group import CURVE, CurveModel, CurvePoint, PointTable, double
from .periods_dilog import GUARD, TorusData, cached_periods, elliptic_log, _cubic_roots
from .quad_fields import (
    REAL_PLACES,
    W,
    FieldElement,
    FinitePlace,
    RealPlace,
    embed,
    primes_above,
    valuation,
)

BAD_PRIMES = (5, 7)


@dataclass(frozen=True)
class FiniteHeightValue:
    multiplier: Fraction
    place: FinitePlace

    def value(self, dps: int):
        with mpmath.workdps(dps + GUARD):
            return mpf(self.multiplier.numerator) / self.multiplier.denominator * mpmath.log(
                self.place.residue_field_size
            )


@dataclass(frozen=True)
class ArchHeightValue:
    value: mpf
    place: RealPlace
    dps: int


# ---------------------------------------------------------------------------
# finite places
# ---------------------------------------------------------------------------


def _reduction_data(p: CurvePoint, v: FinitePlace, curve: CurveModel):
    a1, a2, a3, a4, a6 = curve.ainvs
    x, y = p.x, p.y
    A = valuation(3 * x * x + 2 * a2 * x + a4 - a1 * y, v)
    B = valuation(2 * y + a1 * x + a3, v)
    C = valuation(3 * x ** 4 + curve.b2 * x ** 3 + 3 * curve.b4 * x * x + 3 * curve.b6 * x + curve.b8, v)
    return A, B, C


def on_identity_component(p: CurvePoint, v: FinitePlace, curve: CurveModel = CURVE) -> bool:
    """Whether p reduces to a nonsingular point of the (integral) model at v."""
    if p.is_infinity:
        return True
    A, B, _ = _reduction_data(p, v, curve)
    return A <= 0 or B <= 0


def component_correction(p: CurvePoint, v: FinitePlace, curve: CurveModel = CURVE) -> Fraction:
    """Rational correction (in units of log q_v) for points off the identity component.

    Zero when p has nonsingular reduction.
    """
    A, B, C = _reduction_data(p, v, curve)
    if A <= 0 or B <= 0:
        return Fraction(0)
    N = valuation(curve.discriminant, v)
    if valuation(curve.c4, v) == 0:
        # multiplicative reduction
        M = min(Fraction(B), Fraction(N, 2))
        return M * (M - N) / (2 * N)
    if C >= 3 * B:
        return Fraction(-B, 3)
    return Fraction(-C, 8)


def nonarch_multiplier(p: CurvePoint, v: FinitePlace, curve: CurveModel = CURVE) -> Fraction:
    """Exact r with lambda_v(p) = r log q_v (model must be integral at v)."""
    if p.is_infinity:
        raise ValueError("local height is undefined at the identity")
    delta_term = Fraction(valuation(curve.discriminant, v), 12)
    if on_identity_component(p, v, curve):
        return Fraction(max(0, -valuation(p.x, v)), 2) + delta_term
    return component_correction(p, v, curve) + delta_term


def nonarch_multiplier_by_doubling(
    p: CurvePoint, v: FinitePlace, curve: CurveModel = CURVE, max_doublings: int = 8
) -> Fraction:
    """Independent route via lambda(2P) = 4 lambda(P) + v(2y + a1 x + a3) - v(Delta)/4.

    Doubles until the point has nonsingular reduction, where the local height
    is elementary.
    """
    shifts = []
    q = p
    for _ in range(max_doublings + 1):
        if q.is_infinity:
            raise ValueError("point is torsion")
        if on_identity_component(q, v, curve):
            break
        shifts.append(valuation(2 * q.y + curve.a1 * q.x + curve.a3, v))
        q = double(q, curve)
    else:
        raise RuntimeError("no doubling reached the identity component")
    nd = valuation(curve.discriminant, v)
    r = Fraction(max(0, -valuation(q.x, v)), 2) + Fraction(nd, 12)
    for b in reversed(shifts):
        r = (r - b + Fraction(nd, 4)) / 4
    return r


def relevant_places(p: CurvePoint, curve: CurveModel = CURVE) -> list[FinitePlace]:
    """Finite places where lambda_v(p) may be nonzero: bad places and denominators of x."""
    primes = set(BAD_PRIMES)
    if not p.is_infinity:
        d = p.x.denominator()
        f = 2
        while f * f <= d:
            while d % f == 0:
                primes.add(f)
                d //= f
            f += 1
        if d > 1:
            primes.add(d)
    return [v for ell in sorted(primes) for v in primes_above(ell)]


def finite_heights(p: CurvePoint, curve: CurveModel = CURVE) -> dict[FinitePlace, Fraction]:
    return {v: nonarch_multiplier(p, v, curve) for v in relevant_places(p, curve)}


# ---------------------------------------------------------------------------
# real places
# ---------------------------------------------------------------------------


def _bernoulli2(t):
    return t * t - t + mpf(1) / 6


def arch_height_from_torus(p: CurvePoint, torus: TorusData, dps: int) -> mpf:
    """q-product formula for the archimedean local height.

    Evaluated in the Gauss-reduced basis, where |q| is tiny; the value is a
    lattice invariant so the basis choice does not matter.
    """
    tp = elliptic_log(p, torus, dps)
    with mpmath.workdps(dps + GUARD):
        w1, w2 = torus.reduced
        tau = w2 / w1
        z = tp.z * torus.omega1 / w1
        m = mpmath.floor(z.imag / tau.imag)
        z -= m * tau
        return _q_product_height(z, tau, dps)


def _q_product_height(z, tau, dps):
    q = mpmath.expjpi(2 * tau)
    u = mpmath.expjpi(2 * z)
    t = z.imag / tau.imag
    val = -_bernoulli2(t) / 2 * mpmath.log(abs(q)) - mpmath.log(abs(1 - u))
    qn = q
    tol = mpf(10) ** (-(dps + GUARD))
    while abs(qn) > tol:
        val -= mpmath.log(abs((1 - qn * u) * (1 - qn / u)))
        qn *= q
    return val


def arch_height(p: CurvePoint, place: RealPlace, dps: int = 100) -> mpf:
    """lambda_infinity(p) at ``place``, accurate to about 10^-dps."""
    if p.is_infinity:
        raise ValueError("local height is undefined at the identity")
    torus = cached_periods(place.index, dps)
    return arch_height_from_torus(p, torus, dps)


def arch_height_tate(p: CurvePoint, place: RealPlace, dps: int = 100, curve: CurveModel = CURVE) -> mpf:
    """Archimedean height by Tate's doubling series.

    With x shifted so that x >= 1 on the real locus,
    lambda = 1/2 log x + 1/8 sum_n 4^-n log(phi2(x_n)/x_n^4) - log|Delta|/12
    where x_{n+1} = x(2 P_n).  Independent of periods and elliptic logs.
    """
    wd = dps + GUARD
    with mpmath.workdps(wd):
        b2, b4, b6, b8 = (embed(c, place, wd) for c in (curve.b2, curve.b4, curve.b6, curve.b8))
        roots = _cubic_roots(b2, b4, b6, dps)
        e_max = max(mpmath.re(r) for r in roots if abs(mpmath.im(r)) < mpf(10) ** (-dps // 2))
        r = e_max - 1
        b2s = b2 + 12 * r
        b4s = b4 + r * b2 + 6 * r ** 2
        b6s = b6 + 2 * r * b4 + r ** 2 * b2 + 4 * r ** 3
        b8s = b8 + 3 * r * b6 + 3 * r ** 2 * b4 + r ** 3 * b2 + 3 * r ** 4
        x = embed(p.x, place, wd) - r
        if x < 1 - mpf(10) ** (-dps // 2):
            raise ValueError("point is not on the real locus that the shift assumes")
        total = mpmath.log(x) / 2
        weight = mpf(1) / 8
        tol = mpf(10) ** (-(dps + 10))
        while weight > tol:
            x2 = x * x
            phi = x2 * x2 - b4s * x2 - 2 * b6s * x - b8s
            psi_sq = 4 * x2 * x + b2s * x2 + 2 * b4s * x + b6s
            total += weight * mpmath.log(phi / (x2 * x2))
            x = phi / psi_sq
            weight /= 4
        disc = embed(curve.discriminant, place, wd)
        return total - mpmath.log(abs(disc)) / 12


# ---------------------------------------------------------------------------
# global height
# ---------------------------------------------------------------------------


def canonical_height(p: CurvePoint, dps: int = 100, method: str = "local") -> mpf:
    """Canonical height as the sum of local heights over all places of F.

    ``method="local"`` uses the exact finite algorithm and the q-product at
    the real places; ``method="doubling"`` uses the doubling recursion at
    finite places and Tate's doubling series at the real places.
    """
    if p.is_infinity:
        return mpf(0)
    with mpmath.workdps(dps + GUARD):
        total = mpf(0)
        for v in relevant_places(p):
            if method == "local":
                r = nonarch_multiplier(p, v)
            else:
                r = nonarch_multiplier_by_doubling(p, v)
            total += FiniteHeightValue(r, v).value(dps)
        for place in REAL_PLACES:
            if method == "local":
                total += arch_height(p, place, dps)
            elif method == "doubling":
                total += arch_height_tate(p, place, dps)
            else:
                raise ValueError(f"unknown method {method!r}")
        return total


def _ideal_norm(alpha: FieldElement, d: int) -> int:
    """Norm of the integral ideal (alpha, d), alpha integral, as the index of its Z-lattice."""
    gens = [alpha, alpha * W, FieldElement(d), FieldElement(0, d)]
    vecs = [(int(g.a), int(g.b)) for g in gens]
    # index of the Z-span in Z^2 = gcd of the 2x2 minors
    g = 0
    for i in range(4):
        for j in range(i + 1, 4):
            g = math.gcd(g, vecs[i][0] * vecs[j][1] - vecs[i][1] * vecs[j][0])
    return g


def naive_height(x: FieldElement, dps: int = 40) -> mpf:
    """Absolute logarithmic Weil height times [F:Q]: sum over places of log max(1, |x|_v)."""
    with mpmath.workdps(dps + GUARD):
        d = x.denominator()
        alpha = x * d
        # denominator ideal is (d)/(alpha, d)
        total = mpmath.log(mpf(d * d) / _ideal_norm(alpha, d))
        for place in REAL_PLACES:
            total += mpmath.log(max(mpf(1), abs(embed(x, place, dps + GUARD))))
        return total


def naive_doubling_height(p: CurvePoint, doublings: int = 5) -> mpf:
    """h(x(2^n P)) / (2 * 4^n), the classical doubling limit (slow, coarse)."""
    q = p
    for _ in range(doublings):
        q = double(q)
    with mpmath.workdps(40):
        return naive_height(q.x) / (2 * 4 ** doublings)


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def support_scan(table: PointTable, keys=None) -> set[FinitePlace]:
    """Finite places where some table point has a nonzero height multiplier."""
    keys = list(table) if keys is None else keys
    places = set()
    for kl in keys:
        for v, r in finite_heights(table[kl]).items():
            if r != 0:
                places.add(v)
    return places


@dataclass(frozen=True)
class HeightMatrix:
    """Exact finite multipliers and real-place heights for the table points."""

    finite: dict[str, dict[tuple[int, int], Fraction]]  # place label -> point -> r
    places: dict[str, FinitePlace]
    arch: dict[int, dict[tuple[int, int], mpf]]  # real place index -> point -> value
    dps: int

    def to_json(self):
        return {
            "finite": {
                lab: {
                    "q_v": self.places[lab].residue_field_size,
                    "multipliers": {f"{k},{l}": str(r) for (k, l), r in row.items()},
                }
                for lab, row in self.finite.items()
            },
            "arch": {
                f"real{idx}": {
                    "precision_digits": self.dps,
                    "values": {f"{k},{l}": mpmath.nstr(val, self.dps) for (k, l), val in row.items()},
                }
                for idx, row in self.arch.items()
            },
        }


def height_matrix(table: PointTable, dps: int = 100, with_arch: bool = True) -> HeightMatrix:
    places = {}
    for kl in table:
        for v in relevant_places(table[kl]):
            places[v.label] = v
    # both primes above every residue characteristic that occurs
    for v in list(places.values()):
        for w in primes_above(v.residue_char):
            places[w.label] = w
    finite = {
        lab: {kl: nonarch_multiplier(table[kl], v) for kl in table}
        for lab, v in sorted(places.items(), key=lambda t: (t[1].residue_char, t[0]))
    }
    arch = {}
    if with_arch:
        for place in REAL_PLACES:
            arch[place.index] = {kl: arch_height(table[kl], place, dps) for kl in table}
    return HeightMatrix(finite, places, arch, dps)


@lru_cache(maxsize=None)
def cached_height_matrix(dps: int) -> HeightMatrix:
    from .curve_group import build_point_table

    return height_matrix(build_point_table(), dps)
