import pytest
from hypothesis import given, settings, strategies as st

from reciproc.errors import (ConfigInvalid, DescentLevelTooSmall, DomainViolation,
                             NotAdmissiblePair, OracleInapplicable)
from reciproc.reciprocity import (GroupSpec, PairingCase, artin_hasse_t_admissible,
                                  build_context, classical_artin_hasse, iwasawa_coordinate,
                                  pair_artin_hasse_gen, pair_artin_hasse_t, pair_conjugate_check,
                                  pair_iwasawa, pair_oracle, pair_wiles, parse_element)

SPECIAL, MULT = GroupSpec("special", 3), GroupSpec("mult", 3)
G_MULT = GroupSpec("custom", 3, (0, 3, 3, 1))
G_SPECIAL = GroupSpec("custom", 3, (0, 3, 0, 1))
units = st.integers(1, 3 ** 5).filter(lambda u: u % 3)
presets = st.sampled_from([SPECIAL, MULT])


def norm_closed_form(u, p=3, q=3):
    """Coordinate of [w^-1](z) - z for w = N(u) = u^(q-1), n = 1."""
    w_inv = pow(u, -(q - 1), p * p)
    return ((w_inv - 1) // p) % p


def domain_x(c0, k, tail, d):
    x = f"{c0}*e^{k}+{tail}*e^{k + 1}"
    return x + f"+e^{k}*T1" if d == 2 else x


# ---------------------------------------------------------------- oracle

@settings(max_examples=12)
@given(units, presets)
def test_oracle_matches_integer_closed_form(u, spec):
    r = pair_oracle(PairingCase(spec, 1, 1, [str(u)], "e", formula="oracle"))
    assert r.coord.value == norm_closed_form(u)


@pytest.mark.parametrize("u,coord", [(2, 2), (4, 1), (5, 1), (7, 2), (8, 0), (10, 0), (13, 1),
                                     (22, 1)])
def test_classical_artin_hasse_values(u, coord):
    assert classical_artin_hasse(u, 3, 1) == coord
    assert pair_oracle(PairingCase(MULT, 1, 1, [str(u)], "e", formula="oracle")).coord.value == coord


def test_oracle_trivial_for_uniformizer_powers():
    assert pair_oracle(PairingCase(MULT, 1, 1, ["9"], "e", formula="oracle")).coord.value == 0


def test_oracle_methods_agree_at_level_two():
    for u in (2, 4, 7):
        case = PairingCase(SPECIAL, 2, 1, [str(u)], "e", formula="oracle")
        assert pair_oracle(case, "torsion").coord == pair_oracle(case, "norm").coord


def test_oracle_rejects_non_torsion_x():
    with pytest.raises(OracleInapplicable):
        pair_oracle(PairingCase(SPECIAL, 1, 1, ["4"], "e^2+e^3", formula="oracle"))


# ---------------------------------------------------------------- iwasawa

def test_iwasawa_domain_is_enforced():
    with pytest.raises(DomainViolation):
        pair_iwasawa(PairingCase(MULT, 1, 1, ["4"], "e"))
    assert pair_iwasawa(PairingCase(MULT, 1, 1, ["4"], "e^2")).coord.value == 0


def test_formula_outside_domain_differs_from_oracle():
    # at n = 1 the torsion point e has valuation 1, below the proven bound 2
    case = PairingCase(MULT, 1, 1, ["4"], "e")
    ctx = build_context(case)
    value = iwasawa_coordinate([ctx.parse("4", 1)], ctx.parse_x(1), enforce_domain=False)
    assert value.value == 0
    assert pair_oracle(PairingCase(MULT, 1, 1, ["4"], "e", formula="oracle")).coord.value == 1


@pytest.mark.parametrize("spec", [SPECIAL, MULT])
@pytest.mark.parametrize("symbol,x,coord", [
    (["T1", "e"], "e^3", 1),
    (["T1", "e^2"], "e^3", 2),
    (["T1", "e"], "e^2", 0),
    (["T1", "1+e*T1"], "e^2", 0),
])
def test_iwasawa_frozen_values(spec, symbol, x, coord):
    # each value also agrees with the Wiles and Artin-Hasse evaluators below
    assert pair_iwasawa(PairingCase(spec, 1, 2, symbol, x)).coord.value == coord


@settings(max_examples=10)
@given(presets, st.sampled_from([1, 2, 4, 5, 7, 8]), st.integers(2, 3), st.integers(0, 8),
       st.integers(1, 2))
def test_iwasawa_equals_artin_hasse_gen(spec, c0, k, tail, d):
    x = domain_x(c0, k, tail, d)
    g = G_MULT if spec == MULT else G_SPECIAL
    units_ = ["T1"] if d == 2 else []
    iw = pair_iwasawa(PairingCase(spec, 1, d, units_ + ["eg"], x, g=g)).coord
    ah = pair_artin_hasse_gen(PairingCase(spec, 1, d, units_, x, formula="artin-hasse-gen", g=g)).coord
    assert iw == ah


@settings(max_examples=8)
@given(presets, st.sampled_from([1, 2, 4, 5]), st.integers(2, 3), st.integers(1, 2))
def test_wiles_equals_iwasawa_on_normed_symbol(spec, c0, k, power):
    # N_{2/1}(e_2) = e_1, so {e_2^power} at level 2 descends to {e_1^power}
    x = domain_x(c0, k, 0, 1)
    w = pair_wiles(PairingCase(spec, 1, 1, [f"e^{power}"], x, formula="wiles", s=2)).coord
    iw = pair_iwasawa(PairingCase(spec, 1, 1, [f"e^{power}"], x)).coord
    assert w == iw


def test_wiles_needs_level_two_n():
    with pytest.raises(DescentLevelTooSmall):
        pair_wiles(PairingCase(SPECIAL, 1, 1, ["e"], "e^2", formula="wiles", s=1))


# ---------------------------------------------------------------- artin-hasse in t

def test_artin_hasse_t_admissibility():
    assert artin_hasse_t_admissible(3, 1)
    assert not artin_hasse_t_admissible(2, 1)
    assert not artin_hasse_t_admissible(5, 0)
    with pytest.raises(NotAdmissiblePair):
        pair_artin_hasse_t(PairingCase(SPECIAL, 1, 1, ["1+3*e"], "e", formula="artin-hasse-t", t=2))


@pytest.mark.parametrize("u", ["4", "1+3*e", "(1+3*e)*(1+e^11)"])
def test_artin_hasse_t_matches_norm_oracle(u):
    ah = pair_artin_hasse_t(PairingCase(SPECIAL, 1, 1, [u], "e", formula="artin-hasse-t", t=3))
    oc = pair_oracle(PairingCase(SPECIAL, 1, 1, [u], "e", formula="oracle", t=3), "norm")
    assert ah.coord == oc.coord


# ---------------------------------------------------------------- relations

@settings(max_examples=8)
@given(st.sampled_from([1, 2, 4]), st.sampled_from([1, 5, 7]), st.integers(2, 3))
def test_linearity_in_x(a, b, k):
    from reciproc.higher_field import hf_formal_sum
    case = PairingCase(SPECIAL, 1, 2, ["T1", "e"], f"{a}*e^{k}")
    ctx = build_context(case)
    sym = [ctx.parse("T1", 1), ctx.parse("e", 1)]
    x, y = ctx.parse(f"{a}*e^{k}", 1), ctx.parse(f"{b}*e^2*(1+T1)", 1)
    lhs = iwasawa_coordinate(sym, hf_formal_sum(x, y))
    assert lhs == iwasawa_coordinate(sym, x) + iwasawa_coordinate(sym, y)


@pytest.mark.parametrize("g", [G_MULT, G_SPECIAL, GroupSpec("custom", 3, (0, 3, 6, 1))])
@pytest.mark.parametrize("units_,d", [([], 1), (["T1"], 2)])
def test_steinberg_vanishing(g, units_, d):
    case = PairingCase(SPECIAL, 1, d, units_, "eg", formula="artin-hasse-gen", g=g, theta=-1,
                       log_group="g")
    assert pair_artin_hasse_gen(case).coord == 0


def test_steinberg_control_is_nonzero():
    case = PairingCase(SPECIAL, 1, 1, [], "eg^2", formula="artin-hasse-gen", g=G_MULT, theta=-1,
                       log_group="g")
    values = {pair_artin_hasse_gen(PairingCase(**{**case.__dict__, "x": x})).coord.value
              for x in ("eg^2", "eg+eg^2", "2*eg^2+eg^3", "eg^3")}
    assert values != {0}


@pytest.mark.parametrize("symbol,x,d", [(["e"], "e^2", 1), (["T1", "e"], "e^3", 2),
                                        (["T1", "e^2"], "2*e^3+e^2*T1", 2)])
def test_conjugate_check(symbol, x, d):
    r = pair_conjugate_check(PairingCase(SPECIAL, 1, d, symbol, x), G_MULT)
    assert r["ok"], r


# ---------------------------------------------------------------- cases and parsing

@given(presets, st.integers(1, 3), st.integers(1, 3), st.sampled_from(["iwasawa", "oracle", "wiles"]))
def test_case_json_roundtrip(spec, n, d, formula):
    case = PairingCase(spec, n, d, ["e"] * d, "e^2", formula=formula, g=G_MULT)
    back = PairingCase.from_json(case.to_json())
    assert back.to_json() == case.to_json()


def test_case_validation():
    with pytest.raises(ConfigInvalid):
        PairingCase(SPECIAL, 1, 2, ["e"], "e^2")
    with pytest.raises(ConfigInvalid):
        PairingCase(SPECIAL, 1, 1, ["e"], "e^2", formula="nope")
    with pytest.raises(ConfigInvalid):
        PairingCase.from_json({"group": {"preset": "special", "p": 3}, "bogus": 1})


def test_parse_element():
    case = PairingCase(SPECIAL, 1, 2, ["T1", "e"], "e^2")
    ctx = build_context(case)
    F = ctx.field(1)
    e, T = F.gen(), F.T(1)
    assert ctx.parse("2*e^2*T1^-1 + 1", 1) == e * e * T.inverse() * 2 + 1
    assert ctx.parse("(1+e)^3", 1) == (e + 1) ** 3
    with pytest.raises(ConfigInvalid):
        parse_element("e + y", F, ctx.names(1))
    with pytest.raises(ConfigInvalid):
        parse_element("e^(1/2)", F, ctx.names(1))


def test_precision_override(monkeypatch):
    monkeypatch.setenv("RECIPROC_PRECISION_OVERRIDE", "11")
    r = pair_iwasawa(PairingCase(SPECIAL, 1, 2, ["T1", "e"], "e^3"))
    assert r.precision_used == 11 and r.coord.value == 1
    monkeypatch.setenv("RECIPROC_PRECISION_OVERRIDE", "x")
    with pytest.raises(ConfigInvalid):
        pair_iwasawa(PairingCase(SPECIAL, 1, 2, ["T1", "e"], "e^3"))


def test_result_json_shape():
    r = pair_iwasawa(PairingCase(SPECIAL, 1, 2, ["T1", "e"], "e^3"))
    assert set(r.to_json()) == {"coord", "n", "formula", "precision_used", "domain_checks"}
