from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from reciproc.errors import NotPrincipalUnit, UniformizerMismatch
from reciproc.lubin_tate import (check_intertwining, eps_congruence_ok, frobenius_residual_ok,
                                 hom_iso, hom_iso_twisted, preset_pack, preset_series,
                                 solve_frobenius_unit, twisted_residual_ok, validate_lambda)
from reciproc.padic import PadicRing
from reciproc.series import TruncSeries

_PACKS = {}


def pack(name, p, N=10, D=12, **kw):
    key = (name, p, N, D, tuple(sorted(kw.items())))
    if key not in _PACKS:
        kw = {k: (list(v) if isinstance(v, tuple) else v) for k, v in kw.items()}
        _PACKS[key] = preset_pack(name, p, N=N, D=D, **kw)
    return _PACKS[key]


@pytest.mark.parametrize("name,p", [("mult", 3), ("special", 3), ("special", 5), ("mult", 5)])
def test_axioms_hold(name, p):
    res = pack(name, p, D=p * p + 1).check_axioms()
    assert all(res.values()), res


def test_multiplicative_law_is_closed_form():
    pk = pack("mult", 3, D=20)
    assert pk.F.render() == "X + Y + X*Y"
    for k in range(1, 21):
        want = Fraction((-1) ** (k + 1), k)
        got = pk.log.coefficient((k,))
        assert got.equals_at(pk.ring.from_rational(want.numerator, want.denominator), 10)


@pytest.mark.parametrize("p,exps,num,den", [
    # f(F) = F(f, f) in the lowest nonlinear degree q gives (q^q - q) c = binomial(q, i)
    (3, (2, 1), 1, 8),
    (3, (1, 2), 1, 8),
    (5, (4, 1), 1, 624),
    (5, (3, 2), 1, 312),
])
def test_special_law_low_degree_coefficients(p, exps, num, den):
    pk = pack("special", p, D=p * p)
    got = pk.F.coefficient(exps)
    assert got.equals_at(pk.ring.from_rational(num, den), 8)


def test_special_law_has_no_quadratic_terms():
    pk = pack("special", 3)
    for e in ((2, 0), (1, 1), (0, 2)):
        assert pk.F.coefficient(e).is_zero()


@given(st.integers(1, 80), st.integers(1, 80))
def test_endomorphism_laws(a, b):
    res = pack("special", 3, N=8, D=10).check_endo_laws(a, b)
    assert all(res.values()), res


@pytest.mark.parametrize("name,p", [("mult", 3), ("special", 3), ("special", 5)])
def test_w_relation(name, p):
    assert pack(name, p, D=p * p).check_w_relation()


def test_validate_lambda():
    R = PadicRing(3, 1, 8)
    good = preset_series("special", R)
    rep = validate_lambda(good, R(3))
    assert rep and rep["pi_lambda"]
    wrong_linear = TruncSeries.from_coeffs(R, "X", [0, 6, 0, 1], is_polynomial=True)
    assert not validate_lambda(wrong_linear, R(3))["linear_ok"]
    not_frobenius = TruncSeries.from_coeffs(R, "X", [0, 3, 1, 1], is_polynomial=True)
    assert not validate_lambda(not_frobenius, R(3))["mod_pi_ok"]


def test_isomorphism_intertwines():
    F = pack("special", 3, D=9)
    G = pack("custom", 3, D=9, coeffs=(0, 3, 3, 1))
    hom = hom_iso(F, G)
    assert hom.coeffs[0] % 3 ** 8 == 0 and hom.coeffs[1] % 3 ** 8 == 1
    assert check_intertwining(hom)
    hom.coeffs = list(hom.coeffs)
    hom.coeffs[2] += 3
    assert not check_intertwining(hom)


def test_isomorphism_needs_same_uniformizer():
    with pytest.raises(UniformizerMismatch):
        hom_iso(pack("special", 3, D=9), pack("special", 3, D=9, pi=12))


def test_frobenius_unit():
    R = PadicRing(3, 1, 6)
    u = R(4)
    fu = solve_frobenius_unit(u, 6)
    assert frobenius_residual_ok(fu, u, 6)
    assert eps_congruence_ok(fu, u)
    assert not frobenius_residual_ok(fu, R(7), 6)
    with pytest.raises(NotPrincipalUnit):
        solve_frobenius_unit(R(2), 6)


def test_twisted_isomorphism_small():
    N = 4
    F = pack("special", 3, N=N, D=9)
    G = pack("special", 3, N=N, D=9, pi=12)
    fu = solve_frobenius_unit(F.ring(4), N)
    hom = hom_iso_twisted(F, G, fu, D=9)
    assert twisted_residual_ok(hom, N, 9)
    model = hom.coeff_ring
    hom.coeffs = list(hom.coeffs)
    hom.coeffs[3] = hom.coeffs[3] + model.scalar(1)
    assert not twisted_residual_ok(hom, N, 9)
