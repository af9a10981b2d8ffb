"""The curve y^2 + y = x^3 + w x^2 - (93 + 163 w) x + (669 + 1076 w) over Q(sqrt 5).

Exact affine group law on a long Weierstrass model plus the 22 points
[k]P + [l]Q used to build divisors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .quad_fields import ONE, ZERO, W, FieldElement


@dataclass(frozen=True)
class CurveModel:
    a1: FieldElement
    a2: FieldElement
    a3: FieldElement
    a4: FieldElement
    a6: FieldElement

    @property
    def b2(self):
        return self.a1 * self.a1 + 4 * self.a2

    @property
    def b4(self):
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self):
        return self.a3 * self.a3 + 4 * self.a6

    @property
    def b8(self):
        a1, a2, a3, a4, a6 = self.ainvs
        return a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4

    @property
    def c4(self):
        return self.b2 * self.b2 - 24 * self.b4

    @property
    def c6(self):
        b2, b4, b6 = self.b2, self.b4, self.b6
        return -(b2 ** 3) + 36 * b2 * b4 - 216 * b6

    @property
    def discriminant(self):
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @property
    def j_invariant(self):
        return self.c4 ** 3 / self.discriminant

    @property
    def ainvs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def lhs_minus_rhs(self, x: FieldElement, y: FieldElement) -> FieldElement:
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y - (x * x * x + a2 * x * x + a4 * x + a6)


CURVE = CurveModel(
    a1=ZERO,
    a2=W,
    a3=ONE,
    a4=-FieldElement(93, 163),
    a6=FieldElement(669, 1076),
)


class CurvePoint:
    """Affine point (x, y) on ``CURVE``, or the point at infinity."""

    __slots__ = ("x", "y")

    def __init__(self, x: FieldElement | None = None, y: FieldElement | None = None):
        if (x is None) != (y is None):
            raise ValueError("give both coordinates or neither")
        self.x = None if x is None else FieldElement.coerce(x)
        self.y = None if y is None else FieldElement.coerce(y)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __eq__(self, other):
        if not isinstance(other, CurvePoint):
            return NotImplemented
        return self.x == other.x and self.y == other.y

    def __hash__(self):
        return hash((self.x, self.y))

    def __repr__(self):
        if self.is_infinity:
            return "CurvePoint(infinity)"
        return f"CurvePoint([{self.x}, {self.y}])"

    def __add__(self, other):
        return add(self, other)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(other))

    def __rmul__(self, n: int):
        return scalar_mul(n, self)

    def to_json(self):
        if self.is_infinity:
            return None
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    @classmethod
    def from_json(cls, data):
        if data is None:
            return cls()
        return cls(FieldElement.from_json(data["x"]), FieldElement.from_json(data["y"]))


INFINITY_POINT = CurvePoint()


def on_curve(p: CurvePoint, curve: CurveModel = CURVE) -> bool:
    if p.is_infinity:
        return True
    return not curve.lhs_minus_rhs(p.x, p.y)


def neg(p: CurvePoint, curve: CurveModel = CURVE) -> CurvePoint:
    if p.is_infinity:
        return p
    return CurvePoint(p.x, -p.y - curve.a1 * p.x - curve.a3)


def add(p: CurvePoint, q: CurvePoint, curve: CurveModel = CURVE) -> CurvePoint:
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    a1, a2, a3, a4, a6 = curve.ainvs
    if p.x == q.x:
        if p.y + q.y + a1 * q.x + a3 == 0:
            return INFINITY_POINT
        # tangent
        num = 3 * p.x * p.x + 2 * a2 * p.x + a4 - a1 * p.y
        den = 2 * p.y + a1 * p.x + a3
        lam = num / den
        nu = (-p.x ** 3 + a4 * p.x + 2 * a6 - a3 * p.y) / den
    else:
        lam = (q.y - p.y) / (q.x - p.x)
        nu = (p.y * q.x - q.y * p.x) / (q.x - p.x)
    x3 = lam * lam + a1 * lam - a2 - p.x - q.x
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def double(p: CurvePoint, curve: CurveModel = CURVE) -> CurvePoint:
    return add(p, p, curve)


def scalar_mul(n: int, p: CurvePoint, curve: CurveModel = CURVE) -> CurvePoint:
    if n < 0:
        return scalar_mul(-n, neg(p, curve), curve)
    result = INFINITY_POINT
    base = p
    while n:
        if n & 1:
            result = add(result, base, curve)
        base = add(base, base, curve)
        n >>= 1
    return result


P = CurvePoint(FieldElement(7, 9), FieldElement(17, 35))
Q = CurvePoint(FieldElement(12, -1), FieldElement(32, -20))


@lru_cache(maxsize=None)
def combo(k: int, l: int) -> CurvePoint:
    """[k]P + [l]Q."""
    return add(scalar_mul(k, P), scalar_mul(l, Q))


# Index set in the printed order of the point table, rows (1)..(22).
POINT_INDEX: tuple[tuple[int, int], ...] = (
    (0, 1), (1, 0), (0, 2), (1, 1), (2, 0), (1, 2), (2, 1), (2, 2),
    (3, -1), (3, 1), (4, 1), (4, 2), (4, 3), (5, 4),
    (1, -1), (1, -2), (3, 0), (3, 2), (4, 4), (5, 2), (6, 0), (6, 4),
)


def _fe(a, b, d=1):
    return FieldElement(Fraction(a, d), Fraction(b, d))


# Printed coordinates; y is None where only x is published.
PRINTED_COORDINATES: dict[tuple[int, int], tuple[FieldElement, FieldElement | None]] = {
    (0, 1): (_fe(12, -1), _fe(32, -20)),
    (1, 0): (_fe(7, 9), _fe(17, 35)),
    (0, 2): (_fe(-4, -11), _fe(11, 8)),
    (1, 1): (_fe(7, 2), _fe(-11, 7)),
    (2, 0): (_fe(3, 5), _fe(2, 1)),
    (1, 2): (_fe(42, -26), _fe(-333, 175)),
    (2, 1): (_fe(2, 4), _fe(2, 5)),
    (2, 2): (_fe(3, 4), _fe(-4, -1)),
    (3, -1): (_fe(1624, -957), _fe(-75625, 46340)),
    (3, 1): (_fe(0, -5), _fe(24, 28)),
    (4, 1): (_fe(27, -26), _fe(-223, 95)),
    (4, 2): (_fe(46, -22), _fe(331, -205)),
    (4, 3): (_fe(67, 99), _fe(957, 1525)),
    (5, 4): (_fe(250362, -154726), _fe(-147263008, 91013545)),
    (1, -1): (_fe(14, 24, 5), None),
    (1, -2): (_fe(2527, 6584, 3481), None),
    (3, 0): (_fe(217, -31, 16), None),
    (3, 2): (_fe(392, 529, 121), None),
    (4, 4): (_fe(13627, 13872, 3481), None),
    (5, 2): (_fe(17367, 12464, 3481), None),
    (6, 0): (_fe(792753, 52969, 222784), None),
    (6, 4): (_fe(1700, 1357, 605), None),
}


class PointTableMismatch(AssertionError):
    """A computed combination disagrees with the printed point table."""


@dataclass(frozen=True)
class PointTable:
    points: dict[tuple[int, int], CurvePoint]

    def __getitem__(self, key):
        return self.points[key]

    def __iter__(self):
        return iter(POINT_INDEX)

    def __len__(self):
        return len(self.points)

    def items(self):
        return [(kl, self.points[kl]) for kl in POINT_INDEX]

    def to_json(self):
        return [
            {"row": i + 1, "k": k, "l": l, "point": self.points[(k, l)].to_json()}
            for i, (k, l) in enumerate(POINT_INDEX)
        ]


def build_point_table(check: bool = True) -> PointTable:
    points = {}
    for row, kl in enumerate(POINT_INDEX, start=1):
        pt = combo(*kl)
        if check:
            x, y = PRINTED_COORDINATES[kl]
            if pt.is_infinity or pt.x != x or (y is not None and pt.y != y):
                raise PointTableMismatch(f"row ({row}) [{kl[0]}]P+[{kl[1]}]Q: computed {pt}")
            if not on_curve(pt):
                raise PointTableMismatch(f"row ({row}) is not on the curve")
        points[kl] = pt
    return PointTable(points)
