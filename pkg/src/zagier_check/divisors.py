"""Divisors supported on the 22 points [k]P + [l]Q, and the published basis."""

from __future__ import annotations

from dataclasses import dataclass

from .curve_group import POINT_INDEX


@dataclass(frozen=True)
class WeightedDivisor:
    """Integer coefficients a_{k,l}, ordered as ``POINT_INDEX``."""

    coefficients: tuple[int, ...]

    def __post_init__(self):
        if len(self.coefficients) != len(POINT_INDEX):
            raise ValueError(f"expected {len(POINT_INDEX)} coefficients")
        object.__setattr__(self, "coefficients", tuple(int(a) for a in self.coefficients))

    @classmethod
    def from_mapping(cls, coeffs: dict[tuple[int, int], int]) -> "WeightedDivisor":
        unknown = set(coeffs) - set(POINT_INDEX)
        if unknown:
            raise KeyError(f"points outside the table: {sorted(unknown)}")
        return cls(tuple(coeffs.get(kl, 0) for kl in POINT_INDEX))

    @classmethod
    def unit(cls, kl: tuple[int, int]) -> "WeightedDivisor":
        return cls.from_mapping({kl: 1})

    def items(self):
        return zip(POINT_INDEX, self.coefficients)

    def __add__(self, other: "WeightedDivisor") -> "WeightedDivisor":
        return WeightedDivisor(tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self):
        return WeightedDivisor(tuple(-a for a in self.coefficients))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n: int):
        return WeightedDivisor(tuple(n * a for a in self.coefficients))

    def is_zero(self) -> bool:
        return not any(self.coefficients)


ZERO_DIVISOR = WeightedDivisor((0,) * len(POINT_INDEX))

# Published basis of the integral solution lattice: one row per point (in
# POINT_INDEX order), one column per divisor.
_TABLE2_ROWS = (
    (3, 7, -8, -5, -10, -7, -8, 7),
    (2, -23, -11, -45, -48, 18, -181, -33),
    (1, -1, -9, -4, -8, 1, -33, 3),
    (6, -1, -11, 15, -30, 1, -10, 13),
    (3, 5, -12, -17, -13, -1, -45, -7),
    (-2, -1, 16, 3, -4, -3, 37, 0),
    (-2, -4, 0, 14, -14, 4, -14, 26),
    (-3, -1, 18, 1, 26, 7, 52, -22),
    (0, 0, 1, 0, -2, 0, -1, 1),
    (-2, 1, 0, 1, 0, -1, 1, 0),
    (0, 0, -1, -2, -1, 0, 5, -2),
    (0, -1, 1, 0, 0, -3, -2, -1),
    (1, 1, -1, 1, -1, -1, 1, -1),
    (0, 0, -1, 0, 1, 1, -3, 0),
    (0, -2, 0, 2, 0, 2, 2, 0),
    (0, 0, -2, -3, -5, -1, -8, 0),
    (0, 0, 0, -6, -9, 0, -9, -3),
    (0, 0, 0, 0, 0, 0, 0, -4),
    (0, 0, -2, -1, -2, -1, -5, 1),
    (0, 0, 2, -1, -1, 1, 2, -2),
    (0, 0, 0, 2, 3, 0, 3, 1),
    (0, 0, 0, 0, 0, 0, 0, 2),
)

TABLE2_DIVISORS: tuple[WeightedDivisor, ...] = tuple(
    WeightedDivisor(tuple(row[j] for row in _TABLE2_ROWS)) for j in range(8)
)

# Published regulator vectors (28 displayed digits); the first row is zero
# to working precision.
TABLE3_ROWS: tuple[tuple[str, str], ...] = (
    ("1.7e-100", "-2.9e-105"),
    ("3.657296793764310936796018961", "-4.861051673717091496858129462"),
    ("-3.657296793764310936796018961", "4.861051673717091496858129462"),
    ("25.64710971025614581418182019", "1.387883495576657586500860340"),
    ("3.657296793764310936796018961", "-4.861051673717091496858129462"),
    ("-3.657296793764310936796018961", "4.861051673717091496858129462"),
    ("35.41524521159629806450776657", "0.2301607695298462830484372999"),
    ("29.30440650402045675097783915", "-3.473168178140433910357269121"),
)

PUBLISHED_L_VALUE = "691.9884130215329129184499757"
