import json
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from zagier_check.cli import build_parser, main
from zagier_check.divisors import PUBLISHED_L_VALUE, TABLE2_DIVISORS, TABLE3_ROWS
from zagier_check.periods_dilog import RegulatorVector
from zagier_check.pipeline import (
    AmbiguousRational,
    PipelineConfig,
    compare,
    determinants,
    recognize_rational,
    significant_digits,
)


def printed_vectors():
    with mpmath.workdps(60):
        return [RegulatorVector(mpf(r), mpf(rp), d) for (r, rp), d in zip(TABLE3_ROWS, TABLE2_DIVISORS)]


def test_recognize_examples():
    assert recognize_rational("-0.06250000000000000000000000268") == Fraction(-1, 16)
    assert recognize_rational("0.2500000000000000000000000107") == Fraction(1, 4)
    assert recognize_rational("0.33333333", q_max=2, tol="1e-6") is None


def test_recognize_ambiguous():
    with pytest.raises(AmbiguousRational):
        recognize_rational("0.5", q_max=4, tol="0.2")
    with pytest.raises(ValueError):
        recognize_rational("0.5", q_max=0)


@given(st.integers(-200, 200), st.integers(1, 64))
def test_recognize_exact_fractions(p, q):
    with mpmath.workdps(60):
        x = mpf(p) / q + mpf(10) ** -30
    assert recognize_rational(x) == Fraction(p, q)


def test_printed_rows_zero_set():
    dets, zeros = determinants(printed_vectors(), 40)
    assert len(dets) == 28
    assert sorted(zeros) == sorted(
        [(1, n) for n in range(2, 9)] + [(2, 3), (2, 5), (2, 6), (3, 5), (3, 6), (5, 6)]
    )


def test_printed_rows_ratios():
    with mpmath.workdps(60):
        rep = compare(printed_vectors(), mpf(PUBLISHED_L_VALUE), 40)
    assert len(rep.ratios) == 15
    assert rep.ratios[(4, 7)][1] == Fraction(-1, 16)
    assert rep.ratio_multiset() == {Fraction(1, 16): 1, Fraction(1, 4): 4, Fraction(3, 16): 10}
    data = rep.to_json()
    assert data["ratio_multiset"] == {"1/16": 1, "1/4": 4, "3/16": 10}


def test_compare_without_lvalue():
    rep = compare(printed_vectors(), None, 40)
    assert rep.ratios == {} and len(rep.zero_set) == 13


def test_significant_digits():
    assert significant_digits("1.0000001", "1") == pytest.approx(7, abs=0.1)
    assert significant_digits("2", "2") == 60.0


def test_config_defaults():
    args = build_parser().parse_args(["all"])
    assert (args.precision_digits, args.coeff_bound, args.lll_scale) == (100, 30000, 60)
    assert not args.divisors_from_table2 and not args.skip_lvalue
    assert PipelineConfig().lvalue_dps == 100


def test_cli_rejects_large_scale(tmp_path):
    with pytest.raises(SystemExit):
        main(["kernel", "--precision-digits", "60", "--lll-scale", "40", "--out", str(tmp_path)])


def test_cli_stage_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["regulators", "--divisors-from-table2", "--precision-digits", "100", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["stage"] == "regulators"
    assert {p.name for p in out.iterdir()} == {"relations.json", "regulators.json"}
    reg = json.loads((out / "regulators.json").read_text())
    assert len(reg["rows"]) == 8
    assert all(min(row["r"], row["r_prime"]) >= 25 for row in reg["table3_agreement"][1:])


def _report(out, capsys):
    assert main(["all", "--skip-lvalue", "--precision-digits", "60", "--lll-scale", "25", "--mode", "self", "--out", str(out)]) == 0
    capsys.readouterr()
    data = json.loads((out / "report.json").read_text())
    data.pop("generated_at")
    data["checks"].pop("timings_seconds")
    data["config"].pop("out")
    return data


def test_cli_full_run_deterministic(tmp_path, capsys):
    a = _report(tmp_path / "a", capsys)
    b = _report(tmp_path / "b", capsys)
    assert a == b
    # self mode reports the LLL basis, whose zero pattern differs from the printed columns
    assert a["zero_set"] and a["l_value"] is None and a["ratios"] == {}
    names = {p.name for p in (tmp_path / "a").iterdir()}
    assert names == {f"{s}.json" for s in ("points", "heights", "kernel", "relations", "regulators", "report")}
    rel = json.loads((tmp_path / "a" / "relations.json").read_text())
    assert rel["rank"] == 8 and all(rel["table2_membership"])
