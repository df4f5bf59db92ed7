import pytest
import sympy
from hypothesis import given, strategies as st

from reciproc.errors import NotAUnit
from reciproc.padic import PadicRing
from reciproc.series import TruncSeries, min_degree_for_tail, tail_rule_ok

P, N, CAP = 5, 8, 8
R = PadicRing(P, 1, N)
X = sympy.symbols("X")
coeff_lists = st.lists(st.integers(-50, 50), min_size=1, max_size=6)


def series(coeffs):
    return TruncSeries.from_coeffs(R, "X", coeffs, cap=CAP, policy="truncate")


def as_list(s):
    out = [0] * (CAP + 1)
    for (k,), c in s.terms.items():
        out[k] = c % P ** N
    return out


def sympy_truncated(expr):
    poly = sympy.Poly(sympy.expand(expr), X)
    out = [0] * (CAP + 1)
    for (k,), c in poly.terms():
        if k <= CAP:
            out[k] = int(c) % P ** N
    return out


def to_expr(coeffs):
    return sum(c * X ** i for i, c in enumerate(coeffs))


@given(coeff_lists, coeff_lists)
def test_product_matches_sympy(a, b):
    assert as_list(series(a) * series(b)) == sympy_truncated(to_expr(a) * to_expr(b))


@given(coeff_lists, st.lists(st.integers(-50, 50), min_size=1, max_size=4))
def test_composition_matches_sympy(a, b):
    inner = [0] + b
    got = series(a).compose(series(inner))
    assert as_list(got) == sympy_truncated(to_expr(a).subs(X, to_expr(inner)))


@given(coeff_lists, coeff_lists)
def test_leibniz_rule(a, b):
    f, g = series(a), series(b)
    lhs = (f * g).derive("X")
    rhs = f.derive("X") * g + f * g.derive("X")
    # differentiating a product truncated at X^CAP is only valid mod X^CAP
    assert as_list(lhs)[:CAP] == as_list(rhs)[:CAP]


@given(st.integers(1, 100).filter(lambda c: c % P), coeff_lists)
def test_inverse_is_inverse(c0, rest):
    f = series([c0] + rest)
    assert as_list(f * f.invert()) == [1] + [0] * CAP


def test_geometric_series():
    assert series([1, 1]).invert().render() == " + ".join(
        ["1"] + [("-" if k % 2 else "") + ("X" if k == 1 else f"X^{k}") for k in range(1, CAP + 1)]
    ).replace("+ -", "- ")


def test_non_unit_inverse_rejected():
    with pytest.raises(NotAUnit):
        series([0, 1]).invert()


def test_bivariate_partials():
    F = TruncSeries(R, ("X", "Y"), {(1, 0): 1, (0, 1): 1, (1, 1): 1}, cap=6, policy="truncate")
    assert F.render() == "X + Y + X*Y"
    assert F.derive("Y").render() == "1 + X"
    assert F.constant_term("Y").render() == "X"


def test_tail_rule():
    d = min_degree_for_tail(1, 5, 5)
    assert tail_rule_ok(1, d, 5, 5)
    assert not tail_rule_ok(1, d - 1, 5, 5)
