import pytest
import sympy
from hypothesis import given, strategies as st

from reciproc.errors import LevelOrder, NonUnitResidue
from reciproc.lubin_tate import preset_pack
from reciproc.padic import INF
from reciproc.tower import (INF_PREC, Tower, TorsionCoord, embed_up, galois_apply,
                            norm_torsion_check, torsion_dlog, torsion_point, torsion_points,
                            trace_norm, trace_torsion_check)

X = sympy.symbols("X")
F_POLY = {"special": {3: 3 * X + X ** 3, 5: 5 * X + X ** 5}, "mult": {3: (1 + X) ** 3 - 1}}
_TOWERS = {}


def tower(name, p, N=6):
    key = (name, p, N)
    if key not in _TOWERS:
        _TOWERS[key] = Tower(preset_pack(name, p, N=N), N)
    return _TOWERS[key]


def phi_by_sympy(f, s):
    top, bot = X, X
    for _ in range(s):
        top = f.subs(X, top)
    for _ in range(s - 1):
        bot = f.subs(X, bot)
    q, r = sympy.div(sympy.expand(top), sympy.expand(bot), X)
    assert r == 0
    return [int(c) for c in reversed(sympy.Poly(q, X).all_coeffs())]


@pytest.mark.parametrize("name,p,s", [("special", 3, 1), ("special", 3, 2), ("mult", 3, 1),
                                      ("mult", 3, 2), ("special", 5, 1)])
def test_phi_matches_polynomial_division(name, p, s):
    R = tower(name, p).level(s)
    want = phi_by_sympy(F_POLY[name][p], s)
    assert [c % R.Mc for c in R.phi] == [c % R.Mc for c in want]
    assert R.poly_eval_exact(R.phi, R.gen()).is_zero()


@pytest.mark.parametrize("name,p", [("special", 3), ("mult", 3), ("special", 5)])
@pytest.mark.parametrize("s", [1, 2])
def test_different_valuation(name, p, s):
    R = tower(name, p, N=4).level(s)
    q = R.q
    assert R.different_valuation() == s * (q ** s - q ** (s - 1)) - q ** (s - 1)


def small_elements(R):
    return st.lists(st.integers(-40, 40), min_size=1, max_size=R.m).map(
        lambda c: R.element(c + [0] * (R.m - len(c)), prec=INF_PREC))


R1 = tower("special", 3, N=6).level(1)
R2 = tower("special", 3, N=6).level(2)


@given(small_elements(R2), small_elements(R2))
def test_relative_norm_multiplicative(a, b):
    if a.valuation() == INF or b.valuation() == INF:
        return
    lhs = trace_norm(a * b, 1, "norm")
    rhs = trace_norm(a, 1, "norm") * trace_norm(b, 1, "norm")
    t = min(lhs.prec, rhs.prec)
    assert lhs.equals_at(rhs, t)


@given(small_elements(R2), small_elements(R2))
def test_relative_trace_additive(a, b):
    lhs = trace_norm(a + b, 1)
    rhs = trace_norm(a, 1) + trace_norm(b, 1)
    assert lhs.equals_at(rhs, min(lhs.prec, rhs.prec))


def test_norm_and_trace_of_uniformizer():
    e = R1.gen(prec=INF_PREC)
    assert trace_norm(e, 0, "norm").to_int() == 3
    assert trace_norm(e, 0).valuation() == INF
    Rm = tower("mult", 3).level(1)
    em = Rm.gen(prec=INF_PREC)
    assert trace_norm(em, 0).to_int() % 3 ** 5 == (-3) % 3 ** 5
    # level 2 over level 1: N(e_2) = e_1 for monic f
    assert trace_norm(R2.gen(prec=INF_PREC), 1, "norm").equals_at(R1.gen(), 5)


def test_embed_up_is_ring_map():
    a = R1.element([2, 5], prec=INF_PREC)
    b = R1.element([1, 7], prec=INF_PREC)
    assert embed_up(a * b, 2) == embed_up(a, 2) * embed_up(b, 2)
    with pytest.raises(LevelOrder):
        embed_up(R2.gen(), 1)


@given(small_elements(R2).filter(lambda a: a.valuation() == 0))
def test_inverse(a):
    assert (a * a.inverse()).equals_at(R2.one(), R2.P - 2)


@pytest.mark.parametrize("c,d", [(1, 2), (2, 4), (4, 7), (8, 5)])
def test_galois_action_composes(c, d):
    a = R2.element([3, 1, 4, 1, 5, 9], prec=INF_PREC)
    lhs = galois_apply(c, galois_apply(d, a))
    rhs = galois_apply(c * d, a)
    assert lhs.equals_at(rhs, min(lhs.prec, rhs.prec))
    b = R2.element([2, 0, 1], prec=INF_PREC)
    prod = galois_apply(c, a * b)
    assert prod.equals_at(galois_apply(c, a) * galois_apply(c, b), prod.prec)
    with pytest.raises(NonUnitResidue):
        galois_apply(3, a)


def test_torsion_table_level_one():
    rows = torsion_points(R1, 1)
    assert [c.value for c, _ in rows] == [0, 1, 2]
    e = R1.gen()
    assert rows[1][1] == e and rows[2][1] == -e
    Rm = tower("mult", 3).level(1)
    em = Rm.gen()
    # [2](e) = (1+e)^2 - 1 with e^2 = -3e - 3
    assert torsion_points(Rm, 1)[2][1] == em * 2 + em * em


@pytest.mark.parametrize("c", range(9))
def test_torsion_dlog_inverts_torsion_point(c):
    pt = torsion_point(R2, c, 2)
    assert torsion_dlog(pt, 2) == TorsionCoord(c, 2, 3)


def test_torsion_coordinate_arithmetic():
    a, b = TorsionCoord(5, 2, 3), TorsionCoord(7, 2, 3)
    assert (a + b).value == 3 and (a - b).value == 7 and (-a).value == 4
    assert a.to_json() == {"coord": 5, "n": 2}


def test_norm_and_trace_torsion_identities():
    ring = tower("special", 3, N=6).level(2)
    assert norm_torsion_check(ring, 1, xdeg=4)[2]
    assert trace_torsion_check(ring, 1, 1)[2]
