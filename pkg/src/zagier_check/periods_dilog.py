"""Period lattices, elliptic logarithms and the elliptic dilogarithm.

For each real embedding of F the curve becomes a real elliptic curve
E(C) = C / (Z omega1 + Z omega2).  Points are mapped to z in C/[1, tau]
(the elliptic log divided by the real period), then to u = exp(2 pi i z),
and the q-symmetrized Bloch-Wigner dilogarithm

    D_q(u) = sum_{n in Z} D(u q^n),     q = exp(2 pi i tau)

is summed against a divisor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

from .curve_group import CURVE, CurveModel, CurvePoint, POINT_INDEX, combo
from .divisors import WeightedDivisor
from .quad_fields import REAL_PLACES, RealPlace, embed

DEFAULT_DPS = 100
GUARD = 15


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusData:
    """Period lattice of the curve at one real place.

    ``omega1`` is the (positive) real period and tau = omega2/omega1 has
    positive imaginary part.  ``reduced`` is an SL2(Z)-equivalent basis used
    only for fast evaluation of lattice functions.
    """

    omega1: mpc
    omega2: mpc
    tau: mpc
    q: mpc
    place: RealPlace
    dps: int
    reduced: tuple[mpc, mpc]
    b2: mpf
    a1: mpf
    a3: mpf

    @property
    def primed(self) -> bool:
        """True for the embedding whose tau solves 7 t^2 + 7 t + 3 = 0."""
        return _matches_primed_quadratic(self.tau, self.dps)


def _matches_primed_quadratic(tau, dps) -> bool:
    with mpmath.workdps(dps):
        unprimed = abs(35 * tau ** 2 + 35 * tau + 9)
        primed = abs(7 * tau ** 2 + 7 * tau + 3)
    return primed < unprimed


def _cubic_roots(b2, b4, b6, dps):
    with mpmath.workdps(dps + GUARD):
        roots = mpmath.polyroots([4, b2, 2 * b4, b6], maxsteps=400, extraprec=4 * dps)
    return roots


def reduce_basis(w1, w2, dps: int):
    """Gauss-reduce the lattice basis (w1, w2); returns basis with Im(w2/w1) > 0."""
    with mpmath.workdps(dps + GUARD):
        w1, w2 = mpc(w1), mpc(w2)
        for _ in range(200):
            if abs(w2) < abs(w1):
                w1, w2 = w2, -w1
            n = mpmath.nint((w2 / w1).real)
            w2 = w2 - n * w1
            if abs(w2) >= abs(w1) * (1 - mpf(10) ** (-10)):
                break
        if (w2 / w1).imag < 0:
            w2 = -w2
    return w1, w2


def periods(place: RealPlace, dps: int = DEFAULT_DPS, curve: CurveModel = CURVE) -> TorusData:
    """Fundamental periods at ``place`` by the arithmetic-geometric mean."""
    wd = dps + GUARD
    with mpmath.workdps(wd):
        b2, b4, b6 = (embed(c, place, wd) for c in (curve.b2, curve.b4, curve.b6))
        disc = embed(curve.discriminant, place, wd)
        roots = _cubic_roots(b2, b4, b6, dps)
        if disc < 0:
            e1 = min(roots, key=lambda r: abs(mpmath.im(r)))
            e1 = mpmath.re(e1)
            a = 3 * e1 + b2 / 4
            b = mpmath.sqrt(3 * e1 ** 2 + b2 / 2 * e1 + b4 / 2)
            w1 = 2 * mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            w2 = -w1 / 2 + 1j * mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a))
        else:
            e3, e2, e1 = sorted(mpmath.re(r) for r in roots)
            w1 = mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            w2 = 1j * mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
        w1 = mpc(w1)
        tau = w2 / w1
        q = mpmath.expjpi(2 * tau)
        reduced = reduce_basis(w1, w2, dps)
        a1 = embed(curve.a1, place, wd)
        a3 = embed(curve.a3, place, wd)
    return TorusData(w1, w2, tau, q, place, dps, reduced, b2, a1, a3)


@lru_cache(maxsize=None)
def cached_periods(place_index: int, dps: int) -> TorusData:
    return periods(RealPlace(place_index), dps)


def weierstrass_p(z, torus: TorusData, dps: int | None = None):
    """(wp(z), wp'(z)) for the lattice of ``torus`` via q-expansions."""
    dps = dps or torus.dps
    with mpmath.workdps(dps + GUARD):
        w1, w2 = torus.reduced
        tau = w2 / w1
        z = mpc(z)
        m = mpmath.floor((z / w1).imag / tau.imag + mpf(0.5))
        z = z - m * w2
        q = mpmath.expjpi(2 * tau)
        u = mpmath.expjpi(2 * z / w1)
        c = 2j * mpmath.pi / w1
        s = mpf(1) / 12 + u / (1 - u) ** 2
        sd = u * (1 + u) / (1 - u) ** 3
        qn = q
        tol = mpf(10) ** (-(dps + GUARD))
        while abs(qn) > tol:
            a = qn * u
            b = qn / u
            s += a / (1 - a) ** 2 + b / (1 - b) ** 2 - 2 * qn / (1 - qn) ** 2
            sd += a * (1 + a) / (1 - a) ** 3 - b * (1 + b) / (1 - b) ** 3
            qn *= q
        return c ** 2 * s, c ** 3 * sd


# ---------------------------------------------------------------------------
# elliptic logarithm
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorusPoint:
    """z reduced modulo [1, tau] and u = exp(2 pi i z)."""

    z: mpc
    u: mpc

    @classmethod
    def from_z(cls, z, tau, dps: int) -> "TorusPoint":
        with mpmath.workdps(dps + GUARD):
            z = mpc(z)
            m = mpmath.floor(z.imag / tau.imag)
            z = z - m * tau
            z = z - mpmath.floor(z.real)
            u = mpmath.expjpi(2 * z)
        return cls(z, u)


def elliptic_log(p: CurvePoint, torus: TorusData, dps: int | None = None) -> TorusPoint:
    """Normalized elliptic logarithm of a point on the real locus.

    The curve is parametrized by x = wp(z) - b2/12, 2y + a1 x + a3 = wp'(z);
    the result is z/omega1 reduced into the [1, tau] frame.
    """
    dps = dps or torus.dps
    if p.is_infinity:
        return TorusPoint(mpc(0), mpc(1))
    wd = dps + GUARD
    with mpmath.workdps(wd):
        place = torus.place
        x = embed(p.x, place, wd)
        y = embed(p.y, place, wd)
        target = x + torus.b2 / 12
        psi2 = 2 * y + torus.a1 * x + torus.a3
        w1 = torus.omega1.real
        if abs(torus.omega2.real / w1 + mpf(0.5)) > mpf(10) ** -5:
            # positive discriminant: two real components
            raise NotImplementedError("only a connected real locus is supported")
        # wp decreases from +inf to e1 on (0, w1/2]; bisect then polish by Newton
        lo, hi = mpf(0), w1 / 2
        if weierstrass_p(hi, torus, dps)[0].real >= target:
            t = hi
        else:
            for _ in range(60):
                mid = (lo + hi) / 2
                if weierstrass_p(mid, torus, 20)[0].real > target:
                    lo = mid
                else:
                    hi = mid
            t = (lo + hi) / 2
            tol = mpf(10) ** (-(dps + 5))
            for _ in range(60):
                val, der = weierstrass_p(t, torus, dps)
                step = (val.real - target) / der.real
                t -= step
                if abs(step) < tol * w1:
                    break
        _, der = weierstrass_p(t, torus, dps)
        if mpmath.sign(der.real) != mpmath.sign(psi2) and psi2 != 0:
            t = -t
        return TorusPoint.from_z(t / w1, torus.tau, dps)


def point_from_z(tp: TorusPoint, torus: TorusData, dps: int | None = None):
    """Inverse map: (x, y) on the embedded curve from a normalized z."""
    dps = dps or torus.dps
    with mpmath.workdps(dps + GUARD):
        wp, dwp = weierstrass_p(tp.z * torus.omega1, torus, dps)
        x = wp - torus.b2 / 12
        y = (dwp - torus.a1 * x - torus.a3) / 2
    return x, y


# ---------------------------------------------------------------------------
# Bloch-Wigner dilogarithm
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _bernoulli_coeffs(dps: int, count: int):
    """B_n/(n+1)! for n = 0..count-1 at working precision."""
    with mpmath.workdps(dps):
        return [mpmath.bernoulli(n) / mpmath.factorial(n + 1) for n in range(count)]


def _li2_power(z, tol):
    s = mpc(0)
    zn = z
    n = 1
    az = abs(z)
    while True:
        term = zn / (n * n)
        s += term
        if abs(zn) < tol * (1 - az):
            return s
        n += 1
        zn *= z


def _li2_bernoulli(z, tol, dps):
    w = -mpmath.log(1 - z)
    aw = abs(w)
    # |B_n/(n+1)!| ~ 2/(2 pi)^n, so the tail is geometric in |w|/(2 pi)
    ratio = aw / (2 * mpmath.pi)
    count = int(mpmath.ceil(mpmath.log(tol) / mpmath.log(ratio))) + 4 if ratio > 0 else 2
    coeffs = _bernoulli_coeffs(dps, max(count, 2))
    s = mpc(0)
    wn = w
    for c in coeffs:
        if c:
            s += c * wn
        wn *= w
    return s


def li2(z, dps: int = DEFAULT_DPS):
    """Principal branch of Li_2 for |z| <= 1 and Re z <= 1/2."""
    with mpmath.workdps(dps + GUARD):
        z = mpc(z)
        tol = mpf(10) ** (-(dps + GUARD))
        if abs(z) <= 0.5:
            return _li2_power(z, tol)
        return _li2_bernoulli(z, tol, dps + GUARD)


def bloch_wigner(z, dps: int = DEFAULT_DPS) -> mpf:
    """D(z) = Im Li_2(z) + arg(1 - z) log|z|.

    Reduced to |z| <= 1, Re z <= 1/2 via D(1/z) = -D(z) and D(1 - z) = -D(z).
    """
    with mpmath.workdps(dps + GUARD):
        z = mpc(z)
        if z.imag == 0:
            return mpf(0)
        sign = 1
        if abs(z) > 1:
            z = 1 / z
            sign = -sign
        if z.real > 0.5:
            z = 1 - z
            sign = -sign
        val = li2(z, dps).imag + mpmath.arg(1 - z) * mpmath.log(abs(z))
        return sign * val


def _dilog_tail_bound(r, aq):
    """Bound on sum_{m >= 0} |D(x_m)| + |D(y_m)| where |x_m|, |y_m| <= r aq^m.

    Uses |D(x)| <= |x| (1.4 + 1.6 |log|x||) for |x| <= 1/2.
    """
    return 4 * r * (2 + abs(mpmath.log(r))) / (1 - aq) ** 2


def elliptic_dilog(pt: TorusPoint, torus: TorusData, dps: int | None = None) -> mpf:
    """D_q(u) = sum over n in Z of D(u q^n), truncated by a geometric tail bound."""
    dps = dps or torus.dps
    with mpmath.workdps(dps + GUARD):
        q = torus.q
        u = pt.u
        aq = abs(q)
        if aq >= 1:
            raise ValueError("|q| must be < 1")
        tol = mpf(10) ** (-(dps + 10))
        total = bloch_wigner(u, dps)
        spread = max(abs(u), 1 / abs(u))
        up = u
        um = 1 / u
        n = 0
        while True:
            n += 1
            up *= q
            um *= q
            total += bloch_wigner(up, dps) - bloch_wigner(um, dps)
            r = aq ** (n + 1) * spread
            if r < 0.5 and _dilog_tail_bound(r, aq) < tol:
                break
        return total


# ---------------------------------------------------------------------------
# regulators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegulatorVector:
    r: mpf
    r_prime: mpf
    divisor: WeightedDivisor

    def to_json(self, digits: int = 28):
        return {
            "r": mpmath.nstr(self.r, digits),
            "r_prime": mpmath.nstr(self.r_prime, digits),
            "coefficients": list(self.divisor.coefficients),
        }


def place_tori(dps: int = DEFAULT_DPS) -> tuple[TorusData, TorusData]:
    """(unprimed, primed) tori, identified by which quadratic tau satisfies."""
    tori = [cached_periods(pl.index, dps) for pl in REAL_PLACES]
    unprimed = [t for t in tori if not t.primed]
    primed = [t for t in tori if t.primed]
    if len(unprimed) != 1 or len(primed) != 1:
        raise RuntimeError("could not match real places to the two lattices")
    return unprimed[0], primed[0]


@lru_cache(maxsize=None)
def dilog_values(dps: int = DEFAULT_DPS) -> dict[tuple[int, int], tuple[mpf, mpf]]:
    """D_q(u_{k,l}) at (unprimed, primed) places for the 22 table points."""
    unprimed, primed = place_tori(dps)
    out = {}
    for kl in POINT_INDEX:
        p = combo(*kl)
        vals = []
        for torus in (unprimed, primed):
            vals.append(elliptic_dilog(elliptic_log(p, torus, dps), torus, dps))
        out[kl] = tuple(vals)
    return out


def regulator_vector(div: WeightedDivisor, dps: int = DEFAULT_DPS) -> RegulatorVector:
    """(1/pi) sum a_{k,l} (D_q(u_{k,l}), D_q'(u'_{k,l}))."""
    values = dilog_values(dps)
    with mpmath.workdps(dps + GUARD):
        r = mpf(0)
        rp = mpf(0)
        for kl, a in div.items():
            if a:
                r += a * values[kl][0]
                rp += a * values[kl][1]
        r /= mpmath.pi
        rp /= mpmath.pi
    return RegulatorVector(r, rp, div)
