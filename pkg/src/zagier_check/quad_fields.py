"""Exact arithmetic in F = Q(sqrt 5) and K = Q(sqrt -35).

Elements of F are stored on the basis {1, w} with w = (1 + sqrt 5)/2, elements
of K on the basis {1, theta} with theta = (1 + sqrt -35)/2.  Coordinates are
``fractions.Fraction`` so every exact path stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Union

import mpmath

Rational = Union[int, Fraction]

INFINITY = float("inf")


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to an exact rational")


def vp_rational(x: Fraction, p: int) -> float | int:
    """p-adic valuation of a rational number (``INFINITY`` for 0)."""
    x = _frac(x)
    if x == 0:
        return INFINITY
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


class FieldElement:
    """a + b*w in Q(sqrt 5), w^2 = w + 1."""

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        self.a = _frac(a)
        self.b = _frac(b)

    @classmethod
    def coerce(cls, x) -> "FieldElement":
        if isinstance(x, FieldElement):
            return x
        return cls(x, 0)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = FieldElement.coerce(other)
        return FieldElement(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(-self.a, -self.b)

    def __sub__(self, other):
        other = FieldElement.coerce(other)
        return FieldElement(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return FieldElement.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.a * other, self.b * other)
        other = FieldElement.coerce(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = b * d
        return FieldElement(a * c + bd, a * d + b * c + bd)

    __rmul__ = __mul__

    def conj(self) -> "FieldElement":
        # w -> 1 - w
        return FieldElement(self.a + self.b, -self.b)

    def norm(self) -> Fraction:
        return self.a * self.a + self.a * self.b - self.b * self.b

    def trace(self) -> Fraction:
        return 2 * self.a + self.b

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt 5)")
        c = self.conj()
        return FieldElement(c.a / n, c.b / n)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in Q(sqrt 5)")
            return FieldElement(self.a / other, self.b / other)
        return self * FieldElement.coerce(other).inverse()

    def __rtruediv__(self, other):
        return FieldElement.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison / hashing ---------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_integral(self) -> bool:
        return self.a.denominator == 1 and self.b.denominator == 1

    def denominator(self) -> int:
        """Least positive integer d with d*self in Z[w]."""
        from math import lcm

        return lcm(self.a.denominator, self.b.denominator)

    def __repr__(self):
        return f"FieldElement({self.a}, {self.b})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        sign = "-" if self.b < 0 else "+"
        return f"{self.a} {sign} {abs(self.b)}*w"

    def to_json(self) -> list[str]:
        return [str(self.a), str(self.b)]

    @classmethod
    def from_json(cls, data) -> "FieldElement":
        return cls(Fraction(data[0]), Fraction(data[1]))


ZERO = FieldElement(0, 0)
ONE = FieldElement(1, 0)
W = FieldElement(0, 1)
SQRT5 = FieldElement(-1, 2)  # 2w - 1


def field_arith(x: FieldElement, y: FieldElement, op: str) -> FieldElement:
    """Dispatch helper: ``op`` is one of add, sub, mul, div."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# places of F
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FinitePlace:
    """A prime ideal of O_F.

    For split primes ``root`` is the residue of w, i.e. the prime is
    (p, w - root).  ``kind`` is one of "split", "inert", "ramified".
    """

    residue_char: int
    kind: str
    root: int | None
    uniformizer: FieldElement

    @property
    def ramification(self) -> int:
        return 2 if self.kind == "ramified" else 1

    @property
    def inertia(self) -> int:
        return 2 if self.kind == "inert" else 1

    @property
    def residue_field_size(self) -> int:
        return self.residue_char ** self.inertia

    @property
    def label(self) -> str:
        if self.kind == "ramified":
            return f"sqrt{self.residue_char}"
        if self.kind == "inert":
            return str(self.residue_char)
        return f"{self.residue_char}:w={self.root}"

    def __str__(self):
        return self.label


@lru_cache(maxsize=None)
def primes_above(p: int) -> tuple[FinitePlace, ...]:
    """Prime ideals of O_F above the rational prime p.

    Found by factoring x^2 - x - 1 modulo p.
    """
    if p < 2:
        raise ValueError(f"not a prime: {p}")
    roots = [r for r in range(p) if (r * r - r - 1) % p == 0]
    if not roots:
        return (FinitePlace(p, "inert", None, FieldElement(p)),)
    if len(roots) == 1:
        # double root: p ramifies, w - r generates the prime above it
        return (FinitePlace(p, "ramified", roots[0], W - roots[0]),)
    places = []
    for r in roots:
        pi = W - r
        if vp_rational(pi.norm(), p) != 1:
            pi = W - (r + p)
        places.append(FinitePlace(p, "split", r, pi))
    return tuple(places)


def place_from_label(label: str) -> FinitePlace:
    if label.startswith("sqrt"):
        return primes_above(int(label[4:]))[0]
    if ":w=" in label:
        p, r = label.split(":w=")
        for v in primes_above(int(p)):
            if v.root == int(r):
                return v
        raise ValueError(f"no prime {label}")
    return primes_above(int(label))[0]


def valuation(x: FieldElement, v: FinitePlace) -> float | int:
    """Additive valuation of x at v, normalized so v(uniformizer) = 1."""
    x = FieldElement.coerce(x)
    if not x:
        return INFINITY
    p = v.residue_char
    m = min(vp_rational(x.a, p), vp_rational(x.b, p))
    scale = Fraction(p) ** m
    y = FieldElement(x.a / scale, x.b / scale)  # p-primitive
    if v.kind == "inert":
        return m
    if v.kind == "ramified":
        return 2 * m + vp_rational(y.norm(), p)
    # split: y lies in v iff a + b*root = 0 mod p
    a, b = y.a, y.b
    num = a.numerator * b.denominator + b.numerator * a.denominator * v.root
    if num % p != 0:
        return m
    return m + vp_rational(y.norm(), p)


def residue(x: FieldElement, v: FinitePlace):
    """Image of a v-integral element in the residue field.

    Split/ramified places return an int mod p, inert places a pair (c, d)
    meaning c + d*w in F_p[w]/(w^2 - w - 1).
    """
    p = v.residue_char
    if valuation(x, v) < 0:
        raise ValueError("element is not integral at v")
    if v.kind == "inert":
        # coordinates are p-integral at an inert prime
        return (_mod(x.a, p), _mod(x.b, p))
    return (_mod(x.a, p) + _mod(x.b, p) * v.root) % p


def _mod(r: Fraction, p: int) -> int:
    if r.denominator % p == 0:
        raise ValueError("non-integral coordinate")
    return r.numerator * pow(r.denominator, -1, p) % p


# ---------------------------------------------------------------------------
# real places
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealPlace:
    index: int  # 1: w -> (1 + sqrt 5)/2 ; 2: w -> (1 - sqrt 5)/2

    def image_of_w(self, dps: int):
        with mpmath.workdps(dps + 10):
            s = mpmath.sqrt(5)
            val = (1 + s) / 2 if self.index == 1 else (1 - s) / 2
        return +val

    def __str__(self):
        return f"real{self.index}"


REAL_PLACES = (RealPlace(1), RealPlace(2))


def embed(x: FieldElement, place: RealPlace, dps: int):
    """Real image of x under ``place`` as an mpf at ``dps`` digits."""
    x = FieldElement.coerce(x)
    with mpmath.workdps(dps + 10):
        wv = place.image_of_w(dps + 10)
        val = mpmath.mpf(x.a.numerator) / x.a.denominator + (
            mpmath.mpf(x.b.numerator) / x.b.denominator
        ) * wv
    return val


# ---------------------------------------------------------------------------
# K = Q(sqrt -35)
# ---------------------------------------------------------------------------

D_K = -35


class KElement:
    """c + d*theta in Q(sqrt -35), theta^2 = theta - 9."""

    __slots__ = ("c", "d")

    def __init__(self, c: Rational = 0, d: Rational = 0):
        self.c = _frac(c)
        self.d = _frac(d)

    def __add__(self, other):
        other = _kcoerce(other)
        return KElement(self.c + other.c, self.d + other.d)

    __radd__ = __add__

    def __neg__(self):
        return KElement(-self.c, -self.d)

    def __sub__(self, other):
        return self + (-_kcoerce(other))

    def __mul__(self, other):
        other = _kcoerce(other)
        c1, d1, c2, d2 = self.c, self.d, other.c, other.d
        dd = d1 * d2
        return KElement(c1 * c2 - 9 * dd, c1 * d2 + d1 * c2 + dd)

    __rmul__ = __mul__

    def conj(self) -> "KElement":
        # theta -> 1 - theta
        return KElement(self.c + self.d, -self.d)

    def norm(self) -> Fraction:
        return self.c * self.c + self.c * self.d + 9 * self.d * self.d

    def __eq__(self, other):
        other = _kcoerce(other)
        return self.c == other.c and self.d == other.d

    def __hash__(self):
        return hash((self.c, self.d))

    def to_complex(self, dps: int = 30):
        with mpmath.workdps(dps + 10):
            theta = mpmath.mpc(0.5, mpmath.sqrt(35) / 2)
            val = self.c + self.d * theta
        return val

    def __repr__(self):
        return f"KElement({self.c}, {self.d})"


def _kcoerce(x) -> KElement:
    if isinstance(x, KElement):
        return x
    return KElement(x, 0)


THETA = KElement(0, 1)


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a | n) for odd positive n."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be odd and positive")
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def residue_mod_sqrt_m35(alpha: KElement) -> int:
    """Rational integer t with alpha = t mod sqrt(-35) (theta = 1/2 there)."""
    if alpha.c.denominator != 1 or alpha.d.denominator != 1:
        raise ValueError("alpha must be integral")
    return (int(alpha.c) + 18 * int(alpha.d)) % 35


def eps_character(alpha: KElement) -> int:
    """The odd quadratic character (t | 35) of alpha modulo sqrt(-35)."""
    t = residue_mod_sqrt_m35(alpha)
    val = jacobi(t, 35)
    if val == 0:
        raise ValueError(f"{alpha!r} is not coprime to sqrt(-35)")
    return val


def k_principal_ideals(bound: int) -> list[tuple[KElement, int]]:
    """One generator for each nonzero principal ideal of O_K of norm <= bound.

    Generators coprime to sqrt(-35) are normalized to eps = +1 (so that the
    Hecke value psi((alpha)) = eps(alpha)*alpha is just alpha).  Others use
    d > 0, or d = 0 and c > 0.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    out = []
    dmax = isqrt(4 * bound // 35) + 2
    for d in range(-dmax, dmax + 1):
        # c^2 + c d + 9 d^2 <= B  <=>  (2c + d)^2 <= 4B - 35 d^2
        rhs = 4 * bound - 35 * d * d
        if rhs < 0:
            continue
        s = isqrt(rhs)
        for c in range((-s - d) // 2 - 1, (s - d) // 2 + 2):
            n = c * c + c * d + 9 * d * d
            if n == 0 or n > bound:
                continue
            alpha = KElement(c, d)
            if (c + 18 * d) % 5 and (c + 18 * d) % 7:
                if eps_character(alpha) != 1:
                    continue
            elif not (d > 0 or (d == 0 and c > 0)):
                continue
            out.append((alpha, n))
    out.sort(key=lambda t: (t[1], int(t[0].d), int(t[0].c)))
    return out
