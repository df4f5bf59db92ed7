import pytest
from hypothesis import given, strategies as st

from reciproc.errors import DivisionByZeroDivisor, NonPrime, UnsupportedEvenPrime, ZeroResidue
from reciproc.padic import INF, PadicRing

R3 = PadicRing(3, 1, 10)
R9 = PadicRing(3, 2, 6)
MOD = 3 ** 10
ints = st.integers(min_value=-10 ** 8, max_value=10 ** 8)


@given(ints, ints, ints)
def test_ring_operations_match_integers(a, b, c):
    x, y, z = R3(a), R3(b), R3(c)
    assert (x + y).to_int() == (a + b) % MOD
    assert (x * y - z).to_int() == (a * b - c) % MOD
    assert (x * (y + z)) == (x * y + x * z)


@given(ints, ints.filter(lambda b: b % 3 != 0))
def test_unit_division_matches_modular_inverse(a, b):
    q = R3(a) / R3(b)
    assert q.to_int() == a * pow(b, -1, MOD) % MOD


@given(st.integers(1, 10 ** 6), st.integers(1, 4))
def test_division_by_p_power_tracks_precision(a, k):
    a = a * 3 + 1
    q = R3(a) / R3(3 ** k)
    assert q.valuation() == -k
    assert q.prec == 10 - k - k
    assert q * R3(3 ** k) == R3(a, q.prec + k)


def test_from_rational_against_fraction():
    x = R3.from_rational(5, 18)
    assert x.valuation() == -2
    back = x * R3(18)
    assert back.equals_at(R3(5), back.prec)


def test_valuation_and_zero():
    assert R3(0).valuation() == INF
    assert R3(54).valuation() == 3
    assert R3(3 ** 10).is_zero()


@pytest.mark.parametrize("r", [1, 2])
def test_teichmuller_is_root_of_unity(r):
    t = R3.teichmuller(r)
    assert t ** 2 == R3.one()
    assert t.residue() == r


def test_teichmuller_in_unramified_extension():
    t = R9.teichmuller([0, 1])
    assert t ** 8 == R9.one()
    assert t ** 4 != R9.one()
    assert t.frobenius() == t ** 3


@given(st.lists(st.integers(0, 3 ** 6), min_size=2, max_size=2),
       st.lists(st.integers(0, 3 ** 6), min_size=2, max_size=2))
def test_frobenius_is_ring_automorphism_of_order_m(a, b):
    x, y = R9(a), R9(b)
    assert (x * y).frobenius() == x.frobenius() * y.frobenius()
    assert (x + y).frobenius() == x.frobenius() + y.frobenius()
    assert x.frobenius().frobenius() == x


@given(ints.filter(lambda a: a % 3 != 0))
def test_frobenius_trivial_on_qp(a):
    assert R3(a).frobenius() == R3(a)


def test_errors():
    with pytest.raises(UnsupportedEvenPrime):
        PadicRing(2)
    with pytest.raises(NonPrime):
        PadicRing(9)
    with pytest.raises(DivisionByZeroDivisor):
        R3(1) / R3(0)
    with pytest.raises(ZeroResidue):
        R3.teichmuller(3)
