"""The canonical derivation Q_{M,s} and the logarithmic derivative QL_s.

For M = K_s{{T_1}}...{{T_{d-1}}} the generator b' of the different of
M/K_s is l'_f(e_s), so

    Q(a_1..a_d) = T_1...T_{d-1} / (l'_f(e_s) pi^s) * det[d a_i / d T_j]

with T_d = e_s.  Values are returned with a threshold: the valuation from
which on the value is not determined by the definition.  With
v_M(pi_1) = q^(s-1) and v_M(D(K_s/K)) = s*m_s - q^(s-1):

    (pi^s / pi_1) P_M          has valuation  -q^(s-1)
    (pi^s / (pi_1 e_s)) P_M    has valuation  -q^(s-1) - 1
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import PrecisionExhausted
from .higher_field import (HFElement, det, hf_embed_up,
                           hf_norm_trace_level, partial, unit_decompose)
from .padic import INF
from .tower import galois_apply, log_derivative_at


@dataclass
class ModValue:
    value: HFElement
    threshold: int

    def agrees_with(self, other, threshold=None):
        """(ok, valuation of the difference) at the coarser of the two thresholds."""
        t = max(self.threshold, other.threshold) if threshold is None else threshold
        diff = self.value - other.value
        if diff.prec < t:
            raise PrecisionExhausted(f"difference known only to {diff.prec} < threshold {t}")
        v = diff.valuation()
        return (v == INF or v >= t), v

    def to_json(self):
        return {"value": self.value.to_json(), "threshold": self.threshold}


def derivation_threshold(field):
    return -field.ring.q ** (field.ring.s - 1)


def unlifted_threshold(field):
    return derivation_threshold(field) - 1


def _b_prime(field):
    R = field.ring
    key = ("bprime",)
    hit = R._cache.get(key)
    if hit is None:
        hit = log_derivative_at(R, R.gen())
        R._cache[key] = hit
    return hit


def _prefactor(field):
    """T_1...T_{d-1} / (b' pi^s)."""
    R = field.ring
    scale = (_b_prime(field) * R.pi ** R.s).inverse()
    return field.scalar(scale).shift((1,) * field.nvars)


def jacobian(entries):
    d = entries[0].field.d
    return [[partial(a, j) for j in range(1, d + 1)] for a in entries]


def q_derivation(entries) -> ModValue:
    field = entries[0].field
    if len(entries) != field.d:
        raise ValueError(f"need {field.d} entries")
    value = _prefactor(field) * det(jacobian(entries))
    return ModValue(value, derivation_threshold(field))


def _unit_parts(entries):
    out = []
    for a in entries:
        k, kvec, w = unit_decompose(a)
        out.append((k, w.shift(kvec)))
    return out


def _ql_units(units):
    """Q(w_1..w_d) / (w_1...w_d) for units."""
    field = units[0].field
    prod = field.one()
    for w in units:
        prod = prod * w
    return q_derivation(units).value * prod.inverse()


def ql(entries, lifted: bool = False) -> ModValue:
    """QL_s of the symbol {entries} at the level of the entries' field.

    Each entry is split as e_s^k * w with w a unit (T-monomials stay in w);
    the expansion keeps the all-unit term and the terms with exactly one
    uniformizer slot, moved to the last position with its sign.
    """
    field = entries[0].field
    d = field.d
    if len(entries) != d:
        raise ValueError(f"need {d} entries")
    parts = _unit_parts(entries)
    units = [w for _, w in parts]
    value = _ql_units(units)
    e = field.gen()
    any_uniformizer = False
    for i, (k, _) in enumerate(parts):
        if not k:
            continue
        any_uniformizer = True
        others = units[:i] + units[i + 1:]
        sign = -1 if (d - 1 - i) % 2 else 1
        q = q_derivation(others + [e]).value
        denom = e
        for w in others:
            denom = denom * w
        term = q * denom.inverse()
        value = value + term * (k * sign)
    if lifted or not any_uniformizer:
        thr = derivation_threshold(field)
    else:
        thr = unlifted_threshold(field)
    return ModValue(value, thr)


def ql_descent_check(a: HFElement, rest, lifted: bool = False):
    """QL_s(N_{t/s}(a), rest) against Tr_{t/s}(QL_t(a, rest)) with t = s + 1."""
    high = a.field
    t = high.ring.s
    s = rest[0].field.ring.s if rest else t - 1
    if t != s + 1:
        raise ValueError("descent check is for consecutive levels")
    low = high.at_level(s)
    norm = hf_norm_trace_level(a, s, "norm")
    lhs = ql([norm] + list(rest), lifted=lifted)
    top = ql([a] + [hf_embed_up(r, t) for r in rest], lifted=lifted)
    rhs_val = hf_norm_trace_level(top.value, s, "trace")
    threshold = unlifted_threshold(low)
    rhs = ModValue(rhs_val, threshold)
    ok, v = lhs.agrees_with(rhs, threshold)
    return {"lhs": lhs.value, "rhs": rhs_val, "threshold": threshold, "diff_valuation": v,
            "ok": ok}


def hf_galois_apply(c, a: HFElement) -> HFElement:
    return a.map_coefficients(lambda x: galois_apply(c, x))


def q_galois_check(c, entries):
    """Q^g = tau(g^-1) Q with tau(g) = c, checked on the given entries."""
    field = entries[0].field
    R = field.ring
    M = R.p ** R.s
    craw = c % M
    cinv = pow(craw, -1, M)
    twisted = [hf_galois_apply(cinv, a) for a in entries]
    lhs = hf_galois_apply(craw, q_derivation(twisted).value)
    base = q_derivation(entries)
    rhs = base.value * cinv
    threshold = base.threshold
    diff = lhs - rhs
    if diff.prec < threshold:
        raise PrecisionExhausted("galois check lacks precision")
    v = diff.valuation()
    return {"lhs": lhs, "rhs": rhs, "threshold": threshold, "diff_valuation": v,
            "ok": v == INF or v >= threshold}
