"""Acceptance criteria 1-11, each run at its stated tolerance and time limit.

One line per criterion is printed in the pytest terminal summary (and when
this file is run directly with python3).
"""
import time

import pytest

from reciproc.harness import run_suite

RESULTS = {}


def run_criterion(number, suites, limit, config=None, minimum=None):
    """Run suites, record the outcome line, and return (records, elapsed)."""
    cfg = {"suites": suites, "seed": 0}
    cfg.update(config or {})
    start = time.perf_counter()
    records = run_suite(cfg)
    elapsed = time.perf_counter() - start
    failed = [r for r in records if not r["pass"]]
    problems = []
    if failed:
        first = failed[0]
        why = first["lhs"].get("error") if isinstance(first["lhs"], dict) else None
        problems.append(f"{len(failed)} of {len(records)} checks failed"
                        + (f", first: {why}" if why else ""))
    if elapsed >= limit:
        problems.append(f"runtime {elapsed:.1f}s over {limit}s")
    for label, (count, need) in (minimum or {}).items():
        if count(records) < need:
            problems.append(f"only {count(records)} {label}, need {need}")
    status = "FAIL" if problems else "PASS"
    detail = "; ".join(problems) if problems else f"{len(records)} checks"
    RESULTS[number] = f"criterion {number}: {status} ({detail}, {elapsed:.1f}s)"
    print(RESULTS[number])
    return records, elapsed, failed, problems


def count_where(**match):
    def count(records):
        return sum(all(r["case"].get(k) == v for k, v in match.items()) for r in records)
    return count


def test_criterion_01_formal_group_axioms():
    records, _, failed, problems = run_criterion(1, ["group-axioms"], 10, {"N": 12, "D": 30})
    assert {(r["case"]["preset"], r["case"]["p"]) for r in records} == {
        ("mult", 3), ("special", 3), ("special", 5)}
    assert all(r["case"]["D"] >= 30 and r["case"]["N"] >= 12 for r in records)
    assert not problems, problems


def test_criterion_02_multiplicative_closed_form():
    records, _, failed, problems = run_criterion(2, ["multiplicative-closed-form"], 60, {"D": 30})
    assert all(r["case"]["D"] >= 30 for r in records)
    assert not problems, problems


def test_criterion_03_tower_different():
    records, _, failed, problems = run_criterion(3, ["tower-different"], 10)
    seen = {(r["case"]["p"], r["case"]["s"]) for r in records}
    assert {(3, 1), (3, 2), (5, 1), (5, 2)} <= seen
    assert not problems, problems


def test_criterion_04_norm_and_trace_torsion():
    records, _, failed, problems = run_criterion(4, ["norm-torsion", "trace-torsion"], 30,
                                                 {"N": 10})
    assert {r["suite"] for r in records} == {"norm-torsion", "trace-torsion"}
    assert all(r["case"]["N"] >= 10 for r in records)
    assert not problems, problems


def test_criterion_05_w_relation():
    _, _, failed, problems = run_criterion(5, ["w-relation"], 60)
    assert not problems, problems


def test_criterion_06_ql_descent():
    _, _, failed, problems = run_criterion(
        6, ["ql-descent"], 60,
        minimum={"d=1 symbols": (count_where(d=1, p=3), 5), "d=2 symbols": (count_where(d=2, p=3), 5)})
    assert not problems, problems


def test_criterion_07_ql_galois():
    records, _, failed, problems = run_criterion(7, ["ql-galois"], 60)
    basic = {(r["case"]["d"], r["case"]["c"]) for r in records
             if r["case"]["entries"] in (["e"], ["T1", "e"])}
    assert basic == {(1, 1), (1, 2), (2, 1), (2, 2)}
    assert not problems, problems


def test_criterion_08_oracle_equivalence():
    records, _, failed, problems = run_criterion(
        8, ["oracle-vs-iwasawa"], 30, {"samples": 8},
        minimum={"mult units": (count_where(preset="mult"), 8),
                 "special units": (count_where(preset="special"), 8)})
    assert not problems, problems


def test_criterion_09_cross_formula():
    _, _, failed, problems = run_criterion(
        9, ["wiles-vs-iwasawa", "artin-hasse-gen-vs-iwasawa"], 300,
        minimum={"Wiles cases": (lambda rs: sum(r["suite"] == "wiles-vs-iwasawa" for r in rs), 10),
                 "Artin-Hasse cases": (lambda rs: sum(r["suite"] == "artin-hasse-gen-vs-iwasawa"
                                                      for r in rs), 10)})
    assert not problems, problems


def test_criterion_10_change_of_uniformizer():
    records, _, failed, problems = run_criterion(10, ["change-of-uniformizer"], 60)
    assert records[0]["case"]["u"] == 4 and records[0]["case"]["N"] >= 8
    assert records[1]["case"]["D"] >= 20
    assert not problems, problems


def test_criterion_11_linearity_and_steinberg():
    records, _, failed, problems = run_criterion(
        11, ["linearity", "steinberg"], 300,
        minimum={"linearity cases": (lambda rs: sum(r["suite"] == "linearity" for r in rs), 10)})
    evaluators = {r["case"]["evaluator"] for r in records if r["suite"] == "linearity"}
    assert evaluators == {"iwasawa", "wiles", "artin-hasse-gen", "oracle", "artin-hasse-t"}
    assert not problems, problems


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                pass
