"""Numerical verification of Zagier's conjecture for L(E, 2) on a CM curve over Q(sqrt 5)."""

from .curve_group import CURVE, P, Q, build_point_table
from .divisors import PUBLISHED_L_VALUE, TABLE2_DIVISORS, WeightedDivisor
from .pipeline import PipelineConfig, run_pipeline

__all__ = [
    "CURVE",
    "P",
    "Q",
    "build_point_table",
    "PUBLISHED_L_VALUE",
    "TABLE2_DIVISORS",
    "WeightedDivisor",
    "PipelineConfig",
    "run_pipeline",
]
