import pytest
from hypothesis import given, settings, strategies as st

from reciproc.errors import WindowOverflow
from reciproc.higher_field import HField
from reciproc.lubin_tate import preset_pack
from reciproc.padic import INF
from reciproc.ql import (ModValue, derivation_threshold, q_derivation, q_galois_check, ql,
                         ql_descent_check, unlifted_threshold)
from reciproc.reciprocity import parse_element
from reciproc.tower import Tower, log_derivative_at

_FIELDS = {}


def fields(preset, d, p=3):
    key = (preset, d, p)
    if key not in _FIELDS:
        tower = Tower(preset_pack(preset, p, N=8), 8)
        low = HField(tower.level(1), d)
        _FIELDS[key] = (low, low.at_level(2))
    return _FIELDS[key]


def names(F):
    out = {"e": F.gen()}
    out.update({f"T{j}": F.T(j) for j in range(1, F.d)})
    return out


def parse(F, text):
    return parse_element(text, F, names(F))


def test_thresholds():
    low, high = fields("special", 2)
    assert derivation_threshold(low) == -1 and unlifted_threshold(low) == -2
    assert derivation_threshold(high) == -3


@pytest.mark.parametrize("preset", ["special", "mult"])
def test_ql_of_basic_symbol_is_explicit(preset):
    low, _ = fields(preset, 2)
    R = low.ring
    e = R.gen()
    expected = (R.pi * log_derivative_at(R, e) * e).inverse()
    got = ql([low.T(1), low.gen()]).value
    assert got.equals_at(low.scalar(expected), got.prec)


def test_ql_of_units_is_logarithmic():
    low, _ = fields("special", 2)
    a, b, c = parse(low, "1+e*T1"), parse(low, "T1*(1+2*e^2)"), parse(low, "e")
    lhs = ql([a * b, c], lifted=True)
    rhs1, rhs2 = ql([a, c], lifted=True), ql([b, c], lifted=True)
    ok, _ = lhs.agrees_with(ModValue(rhs1.value + rhs2.value, lhs.threshold))
    assert ok


def test_ql_alternating():
    low, _ = fields("special", 2)
    a, b = parse(low, "T1*(1+e)"), parse(low, "e*(1+2*e*T1)")
    v1, v2 = ql([a, b], lifted=True), ql([b, a], lifted=True)
    ok, _ = v1.agrees_with(ModValue(-v2.value, v1.threshold))
    assert ok


def test_q_derivation_of_identity_matrix():
    low, _ = fields("special", 2)
    R = low.ring
    value = q_derivation([low.T(1), low.gen()])
    assert value.threshold == -1
    expected = low.scalar((log_derivative_at(R, R.gen()) * R.pi).inverse()) * low.T(1)
    assert value.value.equals_at(expected, value.value.prec)
    assert value.value.valuation() == -2


@settings(max_examples=10)
@given(st.integers(0, 2), st.integers(1, 8), st.integers(1, 3), st.sampled_from(["special", "mult"]))
def test_descent_dimension_one(k, c, j, preset):
    low, high = fields(preset, 1)
    r = ql_descent_check(parse(high, f"e^{k}*(1+{c}*e^{j})"), [])
    assert r["ok"], r["diff_valuation"]


@settings(max_examples=8)
@given(st.integers(0, 2), st.integers(0, 1), st.integers(-1, 1), st.integers(1, 8), st.integers(1, 8))
def test_descent_dimension_two(k, ta, tb, c, c2):
    low, high = fields("special", 2)
    a = parse(high, f"e^{k}*T1^{ta}*(1+{c}*e*T1^{tb})")
    rest = [parse(low, f"e*(1+{c2}*e*T1)")]
    r = ql_descent_check(a, rest)
    assert r["ok"], r["diff_valuation"]


def test_slow_T_decay_exceeds_window():
    # the norm of 1 + e_2 T^2 has a tail e_1^k T^(6k), beyond the default window
    low, high = fields("special", 2)
    with pytest.raises(WindowOverflow):
        ql_descent_check(parse(high, "1+e*T1^2"), [parse(low, "e")])


def test_descent_negative_control():
    # dropping the trace on the right-hand side must break the identity
    low, high = fields("special", 1)
    a = parse(high, "e*(1+e)")
    r = ql_descent_check(a, [])
    wrong = ModValue(r["rhs"] * 2, r["threshold"])
    ok, _ = ModValue(r["lhs"], r["threshold"]).agrees_with(wrong)
    assert not ok


@pytest.mark.parametrize("c", [1, 2])
@pytest.mark.parametrize("entries,d", [(["e"], 1), (["T1", "e"], 2), (["T1+e", "1+e*T1^2"], 2)])
def test_galois_equivariance(c, entries, d):
    low, _ = fields("special", d)
    r = q_galois_check(c, [parse(low, t) for t in entries])
    assert r["ok"]


def test_galois_equivariance_level_two_all_units():
    _, high = fields("special", 2)
    ents = [high.T(1), high.gen()]
    for c in (1, 2, 4, 5, 7, 8):
        assert q_galois_check(c, ents)["ok"]


def test_galois_negative_control():
    low, _ = fields("special", 2)
    ents = [low.T(1), low.gen()]
    r = q_galois_check(2, ents)
    # without the twist by 1/c the two sides differ
    diff = r["lhs"] - q_derivation(ents).value
    assert diff.valuation() < r["threshold"]
