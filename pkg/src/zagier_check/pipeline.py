"""Staged verification run: points -> heights -> kernel -> relations -> regulators -> L-value -> comparison."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import mpmath
from mpmath import mpf

from .curve_group import PointTable, PointTableMismatch, build_point_table
from .divisors import PUBLISHED_L_VALUE, TABLE2_DIVISORS, TABLE3_ROWS, WeightedDivisor
from .l_series import LValueResult, cached_coefficients, lvalue_second
from .local_heights import height_matrix, support_scan
from .periods_dilog import GUARD, RegulatorVector, place_tori, regulator_vector
from .relation_finder import (
    build_system,
    degree_sums,
    in_lattice,
    integer_kernel,
    integral_relations,
    is_saturated,
    place_dependence,
    same_lattice,
    verify_divisor,
)

log = logging.getLogger(__name__)

STAGES = ("points", "heights", "kernel", "relations", "regulators", "lvalue", "compare")


@dataclass
class PipelineConfig:
    precision_digits: int = 100
    coeff_bound: int = 30000
    lll_scale: int = 60
    divisors_from_table2: bool = False
    skip_lvalue: bool = False
    out: Path | None = None
    mode: str = "golden"  # or "self"
    q_max: int = 64
    ratio_tol: str = "1e-20"
    lvalue_precision_digits: int | None = None  # defaults to precision_digits

    @property
    def lvalue_dps(self) -> int:
        return self.lvalue_precision_digits or self.precision_digits

    def echo(self):
        d = asdict(self)
        d["out"] = str(self.out) if self.out else None
        d["lvalue_precision_digits"] = self.lvalue_dps
        return d


class StageFailure(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


class AmbiguousRational(ValueError):
    """More than one p/q within tolerance; the tolerance is too loose for q_max."""


def recognize_rational(x, q_max: int = 64, tol="1e-20") -> Fraction | None:
    """The unique p/q with q <= q_max and |x - p/q| < tol, or None."""
    if q_max < 1:
        raise ValueError("q_max must be >= 1")
    with mpmath.workdps(max(mpmath.mp.dps, 60)):
        x = mpf(x)
        tol = mpf(tol)
        found = set()
        for q in range(1, q_max + 1):
            p = int(mpmath.nint(x * q))
            if abs(x - mpf(p) / q) < tol:
                found.add(Fraction(p, q))
    if len(found) > 1:
        raise AmbiguousRational(f"candidates {sorted(found)} all within tolerance")
    return found.pop() if found else None


@dataclass
class ComparisonReport:
    determinants: dict[tuple[int, int], mpf]
    zero_set: list[tuple[int, int]]
    ratios: dict[tuple[int, int], tuple[mpf, Fraction | None]]
    l_value: mpf | None
    dps: int
    config: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def ratio_multiset(self) -> dict[Fraction, int]:
        out: dict[Fraction, int] = {}
        for _, rat in self.ratios.values():
            if rat is not None:
                out[abs(rat)] = out.get(abs(rat), 0) + 1
        return out

    def to_json(self):
        digits = self.dps
        return {
            "precision_digits": self.dps,
            "config": self.config,
            "determinants": {f"{m},{n}": mpmath.nstr(v, digits) for (m, n), v in self.determinants.items()},
            "zero_set": [f"{m},{n}" for m, n in self.zero_set],
            "ratios": {
                f"{m},{n}": {"value": mpmath.nstr(v, 30), "rational": None if r is None else str(r)}
                for (m, n), (v, r) in self.ratios.items()
            },
            "ratio_multiset": {str(k): v for k, v in sorted(self.ratio_multiset().items())},
            "l_value": None if self.l_value is None else mpmath.nstr(self.l_value, 30),
            "checks": self.checks,
        }


def determinants(vectors: list[RegulatorVector], dps: int) -> tuple[dict, list]:
    """R_{m,n} = r_m r'_n - r_n r'_m for 1 <= m < n, and the pairs below 10^(-dps/2)."""
    dets, zeros = {}, []
    threshold = mpf(10) ** (-(dps // 2))
    with mpmath.workdps(dps + GUARD):
        for (m, a), (n, b) in combinations(enumerate(vectors, start=1), 2):
            d = a.r * b.r_prime - b.r * a.r_prime
            dets[(m, n)] = d
            if abs(d) < threshold:
                zeros.append((m, n))
    return dets, zeros


def compare(
    vectors: list[RegulatorVector], l_value: mpf | None, dps: int, q_max: int = 64, tol="1e-20"
) -> ComparisonReport:
    dets, zeros = determinants(vectors, dps)
    ratios = {}
    if l_value is not None:
        with mpmath.workdps(dps + GUARD):
            for pair, d in dets.items():
                if pair in zeros:
                    continue
                v = d / l_value
                ratios[pair] = (v, recognize_rational(v, q_max, tol))
    return ComparisonReport(dets, zeros, ratios, l_value, dps)


# ---------------------------------------------------------------------------
# golden checks
# ---------------------------------------------------------------------------


def significant_digits(value, reference) -> float:
    with mpmath.workdps(60):
        ref = mpf(reference)
        diff = abs(mpf(value) - ref)
        if diff == 0:
            return 60.0
        return float(-mpmath.log10(diff / abs(ref)))


def table3_agreement(vectors: list[RegulatorVector]) -> list[dict]:
    """Per row: agreement with the printed regulators.

    Rows printed as numerically zero are compared in absolute terms.
    """
    out = []
    for (r_txt, rp_txt), vec in zip(TABLE3_ROWS, vectors):
        if abs(mpf(r_txt)) < 1e-50:
            out.append({"kind": "zero", "max_abs": mpmath.nstr(max(abs(vec.r), abs(vec.r_prime)), 5)})
        else:
            out.append(
                {
                    "kind": "digits",
                    "r": round(significant_digits(vec.r, r_txt), 2),
                    "r_prime": round(significant_digits(vec.r_prime, rp_txt), 2),
                }
            )
    return out


def table3_ok(rows: list[dict], digits: float = 25, zero_level: float = 1e-80) -> bool:
    for row in rows:
        if row["kind"] == "zero":
            if mpf(row["max_abs"]) >= zero_level:
                return False
        elif min(row["r"], row["r_prime"]) < digits:
            return False
    return True


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------


class Pipeline:
    """Runs the stages in order, persisting one JSON artifact per stage."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.artifacts: dict[str, dict] = {}
        self.state: dict = {}
        self.timings: dict[str, float] = {}

    def _write(self, stage: str, payload: dict):
        self.artifacts[stage] = payload
        if self.config.out is not None:
            out = Path(self.config.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{stage}.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def _timed(self, stage, fn):
        t0 = time.perf_counter()
        log.info("stage %s", stage)
        result = fn()
        self.timings[stage] = round(time.perf_counter() - t0, 3)
        return result

    # stages ---------------------------------------------------------------

    def points(self) -> PointTable:
        if "table" not in self.state:
            try:
                table = self._timed("points", build_point_table)
            except PointTableMismatch as exc:
                raise StageFailure("points", str(exc)) from exc
            self.state["table"] = table
            self._write("points", {"points": table.to_json(), "printed_table_reproduced": True})
        return self.state["table"]

    def heights(self):
        if "heights" not in self.state:
            table = self.points()
            dps = self.config.precision_digits
            hm = self._timed("heights", lambda: height_matrix(table, dps))
            support = sorted({v.residue_char for v in support_scan(table)})
            self.state["heights"] = hm
            self._write("heights", {"support_residue_characteristics": support, **hm.to_json()})
        return self.state["heights"]

    def kernel(self):
        if "kernel" not in self.state:
            table, hm = self.points(), self.heights()

            def run():
                system = build_system(table, hm)
                return system, integer_kernel(system.exact_rows, len(table))

            system, kernel = self._timed("kernel", run)
            self.state["system"], self.state["kernel"] = system, kernel
            cols = []
            for j, div in enumerate(TABLE2_DIVISORS, start=1):
                rep = verify_divisor(div, system)
                cols.append(
                    {
                        "column": j,
                        "exact_residuals": rep.exact,
                        "in_kernel": in_lattice(div.coefficients, kernel),
                        "degree_sums": list(degree_sums(div.coefficients)),
                    }
                )
            payload = {
                "system": system.to_json(),
                "kernel_rank": len(kernel),
                "kernel_basis": kernel,
                "saturated": is_saturated(kernel),
                "degree_sums_on_kernel_basis": [list(degree_sums(b)) for b in kernel],
                "place_dependence": mpmath.nstr(place_dependence(kernel, system), 5),
                "table2_columns": cols,
            }
            self._write("kernel", payload)
            if self.config.mode == "golden" and not all(
                not any(c["exact_residuals"]) and c["in_kernel"] for c in cols
            ):
                raise StageFailure("kernel", "a printed relation violates the exact rows")
        return self.state["kernel"]

    def relations(self) -> list[WeightedDivisor]:
        if "divisors" in self.state:
            return self.state["divisors"]
        if self.config.divisors_from_table2:
            divisors = list(TABLE2_DIVISORS)
            self._write("relations", {"source": "table2", "basis": [list(d.coefficients) for d in divisors]})
            self.state["divisors"] = divisors
            return divisors
        kernel, system = self.kernel(), self.state["system"]
        lat = self._timed(
            "relations", lambda: integral_relations(kernel, system, self.config.lll_scale, place_index=1)
        )
        table2 = [list(d.coefficients) for d in TABLE2_DIVISORS]
        members = [lat.contains(c) for c in table2]
        equal = same_lattice(lat.basis, table2)
        other = integral_relations(kernel, system, self.config.lll_scale, place_index=2)
        payload = {
            "source": "lll",
            "rank": lat.rank,
            "kernel_rank": lat.kernel_rank,
            "scale_exponent": lat.scale_exponent,
            "basis": lat.basis,
            "residuals": [mpmath.nstr(r, 5) for r in lat.residuals],
            "table2_membership": members,
            "equals_table2_lattice": equal,
            "same_lattice_at_other_place": same_lattice(lat.basis, other.basis),
        }
        self._write("relations", payload)
        if self.config.mode == "golden":
            if lat.rank != 8 or not all(members):
                raise StageFailure("relations", "lattice does not contain every printed relation")
            # the printed relations are a basis of the same lattice; keep their order
            divisors = list(TABLE2_DIVISORS) if equal else [WeightedDivisor(tuple(b)) for b in lat.basis]
        else:
            divisors = [WeightedDivisor(tuple(b)) for b in lat.basis]
        self.state["divisors"] = divisors
        return divisors

    def regulators(self) -> list[RegulatorVector]:
        if "regulators" not in self.state:
            divisors = self.relations()
            dps = self.config.precision_digits
            vecs = self._timed("regulators", lambda: [regulator_vector(d, dps) for d in divisors])
            self.state["regulators"] = vecs
            agreement = table3_agreement(vecs) if divisors == list(TABLE2_DIVISORS) else None
            self._write(
                "regulators",
                {
                    "precision_digits": dps,
                    "column_order": ["unprimed (tau^2 + tau + 9/35 = 0)", "primed (7 tau^2 + 7 tau + 3 = 0)"],
                    "unprimed_real_place": place_tori(dps)[0].place.index,
                    "rows": [v.to_json(digits=dps) for v in vecs],
                    "table3_agreement": agreement,
                },
            )
            if self.config.mode == "golden" and agreement is not None and not table3_ok(agreement):
                raise StageFailure("regulators", "printed regulators not reproduced to 25 digits")
        return self.state["regulators"]

    def lvalue(self) -> LValueResult | None:
        if self.config.skip_lvalue:
            return None
        if "lvalue" not in self.state:
            dps = self.config.lvalue_dps
            cache = Path(self.config.out) / "cache" if self.config.out else None

            def run():
                coeffs = cached_coefficients(self.config.coeff_bound, cache)
                return lvalue_second(self.config.coeff_bound, dps, coeffs)

            res = self._timed("lvalue", run)
            self.state["lvalue"] = res
            digits = significant_digits(res.value, PUBLISHED_L_VALUE)
            self._write("lvalue", {**res.to_json(), "published_digits_matched": round(digits, 2)})
            if self.config.mode == "golden" and digits < 20:
                raise StageFailure("lvalue", f"only {digits:.1f} digits of the printed value")
        return self.state["lvalue"]

    def compare(self) -> ComparisonReport:
        vecs = self.regulators()
        lres = self.lvalue()
        report = compare(
            vecs,
            None if lres is None else lres.value,
            self.config.precision_digits,
            self.config.q_max,
            self.config.ratio_tol,
        )
        report.config = self.config.echo()
        report.checks = {"timings_seconds": dict(self.timings)}
        payload = report.to_json()
        payload["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
        self._write("report", payload)
        return report

    def run(self, stage: str = "compare"):
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        return getattr(self, stage)()


def run_pipeline(config: PipelineConfig) -> ComparisonReport:
    return Pipeline(config).compare()
