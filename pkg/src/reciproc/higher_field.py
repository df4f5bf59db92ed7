"""Standard higher local fields M = K_s{{T_1}}...{{T_{d-1}}}.

An element is a finite Laurent polynomial in T_1..T_{d-1} whose coefficients
are tower elements (canonical polynomials in the uniformizer e_s).  Exponent
windows are strict: a term that falls outside the window while still being
significant at the element's precision raises ``WindowOverflow``; terms whose
valuation reaches the precision are dropped.

Precision ``prec`` is absolute, in units of v_M (v_M(e_s) = 1, v_M(T_j) = 0):
the element is known modulo elements of valuation >= prec.
"""
from __future__ import annotations

import itertools
import math

from .errors import (DivergentSubstitution, NotAUnit, NotDecomposable,
                     OutsideConvergenceDomain, PrecisionExhausted, WindowOverflow)
from .lubin_tate import _ilog
from .padic import INF, PadicElement
from .tower import (INF_PREC, TowerElement, TowerRing, _base_trace, embed_up,
                    relative_coordinates, trace_norm)



class HField:
    """K_s{{T_1}}...{{T_{d-1}}} over a tower level."""

    def __init__(self, ring: TowerRing, d: int = 1, window=None, prec=None):
        if d < 1:
            raise ValueError("dimension must be >= 1")
        self.ring = ring
        self.d = d
        self.nvars = d - 1
        self.prec = ring.P if prec is None else prec
        if window is None:
            # room for T-adic tails decaying by one e_s-step per few degrees
            width = (ring.q + 1) * (self.prec + 4)
            window = (-width, width)
        lo, hi = window
        if lo > 0 or hi < 0:
            raise ValueError("window must contain 0")
        self.window = (lo, hi)
        self._zero_exp = (0,) * self.nvars
        self._levels = {ring.s: self}

    # construction ---------------------------------------------------------
    def at_level(self, s):
        """The field with the same T-variables over level ``s`` of the tower."""
        hit = self._levels.get(s)
        if hit is None:
            R = self.ring.tower.level(s)
            prec = max(1, (self.prec * R.m) // self.ring.m)
            lo, hi = self.window
            grow = max(1, R.m // self.ring.m)
            hit = HField(R, self.d, (lo * grow, hi * grow), prec=prec)
            hit._levels = self._levels
            self._levels[s] = hit
        return hit

    def element(self, terms=None, prec=None):
        return HFElement(self, terms or {}, self.prec if prec is None else prec)

    def zero(self, prec=None):
        return self.element({}, prec)

    def one(self):
        return self.element({self._zero_exp: self.ring.one(prec=INF_PREC)})

    def scalar(self, x):
        """Embed an integer, PadicElement or TowerElement of this level."""
        if isinstance(x, HFElement):
            return x
        c = self.ring.coerce(x) if not isinstance(x, int) else self.ring.element([x], prec=INF_PREC)
        return self.element({self._zero_exp: c})

    def gen(self):
        """The uniformizer e_s (also written T_d)."""
        return self.scalar(self.ring.gen(prec=INF_PREC))

    def T(self, j, k=1):
        """T_j^k for 1 <= j <= d-1."""
        if not 1 <= j <= self.nvars:
            raise ValueError(f"no variable T_{j} in dimension {self.d}")
        e = [0] * self.nvars
        e[j - 1] = k
        return self.element({tuple(e): self.ring.one(prec=INF_PREC)})

    def monomial(self, exps, coeff=1):
        c = coeff if isinstance(coeff, TowerElement) else self.ring.coerce(coeff) \
            if not isinstance(coeff, int) else self.ring.element([coeff], prec=INF_PREC)
        return self.element({tuple(exps): c})

    def in_window(self, e):
        lo, hi = self.window
        return all(lo <= k <= hi for k in e)

    def __repr__(self):
        return f"HField(level={self.ring.s}, d={self.d}, window={self.window})"


class HFElement:
    __slots__ = ("field", "terms", "prec")

    def __init__(self, field: HField, terms, prec):
        self.field = field
        ring = field.ring
        out = {}
        for e, c in terms.items():
            e = tuple(e)
            if len(e) != field.nvars:
                raise ValueError("exponent tuple has the wrong length")
            if not isinstance(c, TowerElement):
                c = ring.coerce(c) if not isinstance(c, int) else ring.element([c], prec=INF_PREC)
            v = c.valuation()
            if v == INF or v >= prec:
                continue
            if not field.in_window(e):
                raise WindowOverflow(f"term T^{e} of valuation {v} outside window {field.window}")
            out[e] = c.with_prec(prec) if c.prec > prec else c
        self.terms = out
        cprec = min((c.prec for c in out.values()), default=prec)
        self.prec = min(prec, cprec)

    # inspection -----------------------------------------------------------
    @property
    def ring(self):
        return self.field.ring

    def valuation(self):
        best = INF
        for c in self.terms.values():
            v = c.valuation()
            if v != INF and v < best:
                best = v
        return INF if best >= self.prec else best

    def _vlow(self):
        v = self.valuation()
        return self.prec if v == INF else v

    def is_zero(self, prec=None):
        t = self.prec if prec is None else prec
        v = self.valuation()
        return v == INF or v >= t

    def coefficient(self, exps=None):
        e = self.field._zero_exp if exps is None else tuple(exps)
        c = self.terms.get(e)
        if c is None:
            return self.ring.zero(prec=self.prec)
        return c

    def is_scalar(self):
        return all(e == self.field._zero_exp for e in self.terms)

    def with_prec(self, prec):
        return HFElement(self.field, self.terms, min(prec, self.prec))

    def equals_at(self, other, t):
        d = self - other
        if d.prec < t and d.valuation() == INF:
            return False
        v = d.valuation()
        return v == INF or v >= t

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, HFElement):
            if other.field is not self.field:
                raise ValueError("elements of different fields")
            return other
        return self.field.scalar(other)

    def __add__(self, other):
        o = self._coerce(other)
        terms = dict(self.terms)
        for e, c in o.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return HFElement(self.field, terms, min(self.prec, o.prec))

    __radd__ = __add__

    def __neg__(self):
        return HFElement(self.field, {e: -c for e, c in self.terms.items()}, self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prec = min(_add(self.prec, o._vlow()), _add(o.prec, self._vlow()))
        acc = {}
        for ea, ca in self.terms.items():
            for eb, cb in o.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                prod = ca * cb
                acc[e] = acc[e] + prod if e in acc else prod
        return HFElement(self.field, acc, prec)

    __rmul__ = __mul__

    def shift(self, exps):
        """Multiply by the monomial T^exps (exact)."""
        terms = {tuple(x + y for x, y in zip(e, exps)): c for e, c in self.terms.items()}
        return HFElement(self.field, terms, self.prec)

    def inverse(self):
        k_d, kvec, unit = unit_decompose(self)
        winv = _unit_inverse(unit)
        out = winv.shift(tuple(-k for k in kvec))
        if k_d:
            einv = self.ring.gen(prec=INF_PREC) ** (-k_d)
            out = out * einv
        return out

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, e):
        if e < 0:
            return (self ** (-e)).inverse()
        result = self.field.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        return (self - self._coerce(other)).is_zero()

    __hash__ = None

    def map_coefficients(self, fn, prec=None):
        return HFElement(self.field, {e: fn(c) for e, c in self.terms.items()},
                         self.prec if prec is None else prec)

    def to_json(self):
        return {"level": self.ring.s, "d": self.field.d,
                "terms": [{"T": list(e), "coeff": c.to_json()} for e, c in sorted(self.terms.items())],
                "prec": int(min(self.prec, 10 ** 6))}

    def __repr__(self):
        return f"HFElement({self.to_json()})"


def _add(P, v):
    return INF_PREC if P >= INF_PREC else P + v


# ---------------------------------------------------------------------------
# decomposition and inversion
# ---------------------------------------------------------------------------

def unit_decompose(a: HFElement):
    """(k_d, kvec, unit) with a = T^kvec * e_s^k_d * unit and v_M(unit) = 0.

    kvec is the exponent of the leading residue monomial, ordered
    lexicographically starting from T_{d-1}.
    """
    v = a.valuation()
    if v == INF:
        raise NotDecomposable("element is zero at its precision")
    leading = [e for e, c in a.terms.items() if c.valuation() == v]
    kvec = min(leading, key=lambda e: tuple(reversed(e)))
    shifted = a.shift(tuple(-k for k in kvec))
    if v:
        einv = a.ring.gen(prec=INF_PREC) ** (-v)
        shifted = shifted * einv
    if shifted.valuation() != 0:
        raise NotDecomposable("unit part lost precision")
    return v, tuple(kvec), shifted


def _unit_inverse(w: HFElement) -> HFElement:
    """Inverse of a unit whose residue has a constant leading term."""
    field = w.field
    c0 = w.terms.get(field._zero_exp)
    if c0 is None or c0.valuation() != 0:
        raise NotAUnit("residue leading coefficient is not at T^0")
    c0inv = c0.inverse()
    h = w * c0inv - field.one()
    acc = field.one()
    power = field.one()
    limit = 4 * (w.prec + field.window[1] - field.window[0] + 4)
    for _ in range(limit):
        power = power * (-h)
        if power.is_zero(w.prec):
            break
        acc = acc + power
    else:
        raise WindowOverflow("geometric series for the inverse does not settle")
    return (acc * c0inv).with_prec(w.prec)


# ---------------------------------------------------------------------------
# derivations and traces
# ---------------------------------------------------------------------------

def partial(a: HFElement, j: int) -> HFElement:
    """d/dT_j for j < d; for j = d the derivative of the canonical polynomial in e_s."""
    field = a.field
    if not 1 <= j <= field.d:
        raise ValueError("derivation index out of range")
    if j == field.d:
        terms = {e: c.derivative() for e, c in a.terms.items()}
        return HFElement(field, terms, a.prec - 1)
    terms = {}
    for e, c in a.terms.items():
        k = e[j - 1]
        if k:
            ne = list(e)
            ne[j - 1] -= 1
            terms[tuple(ne)] = c * k
    return HFElement(field, terms, a.prec)


def gen_trace(a: HFElement) -> PadicElement:
    """Tower trace of the T^0 coefficient, landing in K."""
    R = a.ring
    c = a.terms.get(a.field._zero_exp)
    bound = (a.prec + R.different_exponent) // R.m if a.prec < INF_PREC else R.pack.W
    if c is None:
        return PadicElement(R.base, R.base.raw(0), bound)
    t = _base_trace(c)
    return PadicElement(R.base, t.num, min(t.prec, bound), t.den)


def hf_norm_trace_level(a: HFElement, s: int, which: str = "trace") -> HFElement:
    """Relative trace or norm from the level of ``a`` down to level ``s``."""
    field = a.field
    t = field.ring.s
    if s == t:
        return a
    low = field.at_level(s)
    r = field.ring.q ** (t - s)
    if which == "trace":
        R = field.ring
        delta_rel = R.different_exponent - r * low.ring.different_exponent
        prec = (a.prec + delta_rel) // r if a.prec < INF_PREC else INF_PREC
        terms = {e: trace_norm(c, s, "trace") for e, c in a.terms.items()}
        return HFElement(low, terms, prec)
    if which != "norm":
        raise ValueError("which must be 'trace' or 'norm'")
    x = field.gen()
    cols = []
    cur = a
    for _ in range(r):
        cols.append(_relative_hf(cur, low, r))
        cur = cur * x
    rows = [[cols[j][i] for j in range(r)] for i in range(r)]
    return _leibniz_det(rows, low.one())


def _relative_hf(a: HFElement, low: HField, r: int):
    coords = [dict() for _ in range(r)]
    for e, c in a.terms.items():
        for i, ci in enumerate(relative_coordinates(c, low.ring.s)):
            coords[i][e] = ci
    prec = -(-(a.prec - r + 1) // r) if a.prec < INF_PREC else INF_PREC
    return [HFElement(low, coords[i], prec) for i in range(r)]


def _leibniz_det(rows, one):
    n = len(rows)
    total = None
    for perm in itertools.permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = one
        for i in range(n):
            term = term * rows[i][perm[i]]
        term = term if sign == 1 else -term
        total = term if total is None else total + term
    return total


def hf_embed_up(a: HFElement, t: int) -> HFElement:
    high = a.field.at_level(t)
    r = a.ring.q ** (t - a.ring.s)
    terms = {e: embed_up(c, t) for e, c in a.terms.items()}
    return HFElement(high, terms, a.prec * r if a.prec < INF_PREC else INF_PREC)


def det(rows):
    """Determinant of a square matrix of HFElements (cofactor expansion)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    return _leibniz_det(rows, rows[0][0].field.one())


# ---------------------------------------------------------------------------
# logarithms and the formal group on the maximal ideal
# ---------------------------------------------------------------------------

def _series_degree(v, m, p, target, log_den=True):
    """Least D such that every k > D has k*v - m*floor(log_p k) >= target."""
    D = 1
    while True:
        ok = True
        for k in range(D + 1, 2 * D + 4):
            if k * v - (m * _ilog(k, p) if log_den else 0) < target:
                ok = False
                break
        if ok:
            return D
        D += 1
        if D > 100000:
            raise DivergentSubstitution("series does not reach the requested precision")


def hf_log_classical(u: HFElement) -> HFElement:
    """log u = sum (-1)^(k+1) (u-1)^k / k for u in V_{M,1}."""
    field = u.field
    R = field.ring
    z = u - field.one()
    vz = z.valuation()
    if vz == INF:
        return field.zero(prec=u.prec)
    # v_M(p) = m_s since K/Q_p is unramified
    if vz * (R.p - 1) <= R.m:
        raise OutsideConvergenceDomain("u is not in V_{M,1}")
    target = min(u.prec, field.prec)
    D = _series_degree(vz, R.m, R.p, target)
    acc = field.zero(prec=target)
    power = field.one()
    for k in range(1, D + 1):
        power = power * z
        sign = 1 if k % 2 else -1
        acc = acc + power * _inverse_int(R, k) * sign
    return acc.with_prec(target)


def _inverse_int(R: TowerRing, k: int) -> TowerElement:
    vk = 0
    while k % R.p == 0:
        k //= R.p
        vk += 1
    digits = R.pack.W
    inv = R.base.raw_inv_unit(R.base.raw(k), digits)
    return TowerElement(R, [inv] + [R.base.raw(0)] * (R.m - 1), R.m * (digits - 2), vk)


def hf_formal_log(x: HFElement, pack=None) -> HFElement:
    """l_f(x) by substitution into the logarithm series."""
    field = x.field
    R = field.ring
    pack = R.pack if pack is None else pack
    v = x.valuation()
    if v == INF:
        return field.zero(prec=x.prec)
    if v < 1:
        raise DivergentSubstitution("argument must lie in the maximal ideal")
    target = min(x.prec, field.prec)
    D = max(_series_degree(v, R.m, R.p, target), 1)
    nums, den = pack.log_extended(D)
    coeff_prec = R.m * (pack.W - _ilog(max(D, 2), pack.q) - 3 - den)
    acc = field.zero(prec=target)
    power = field.one()
    for k in range(1, D + 1):
        power = power * x
        if nums[k]:
            c = TowerElement(R, [nums[k]] + [R.base.raw(0)] * (R.m - 1), coeff_prec, den)
            acc = acc + power * c
    return acc.with_prec(target)


def _bivariate_eval(F: dict, x: HFElement, y: HFElement, D: int, prec: int) -> HFElement:
    field = x.field
    R = field.ring
    xp = [field.one()]
    yp = [field.one()]
    for _ in range(D):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    acc = field.zero(prec=prec)
    for (i, j), c in F.items():
        if c and i + j <= D:
            acc = acc + xp[i] * yp[j] * R.element([c], prec=INF_PREC)
    return acc.with_prec(prec)


def hf_formal_sum(x: HFElement, y: HFElement, pack=None) -> HFElement:
    """x (+)_f y = F_f(x, y)."""
    field = x.field
    pack = field.ring.pack if pack is None else pack
    vx, vy = x.valuation(), y.valuation()
    if vx == INF:
        return y
    if vy == INF:
        return x
    v = min(vx, vy)
    if v < 1:
        raise DivergentSubstitution("arguments must lie in the maximal ideal")
    # the group law is truncated at total degree D
    prec = min(x.prec, y.prec, field.prec, (pack.D + 1) * v)
    return _bivariate_eval(pack._F, x, y, pack.D, prec)


def hf_formal_neg(x: HFElement, pack=None) -> HFElement:
    field = x.field
    R = field.ring
    pack = R.pack if pack is None else pack
    v = x.valuation()
    if v == INF:
        return x
    coeffs = pack.endo_list(R.base.raw(-1) % pack.M)
    D = len(coeffs) - 1
    prec = min(x.prec, (D + 1) * v)
    acc = field.zero(prec=prec)
    power = field.one()
    for k in range(1, D + 1):
        power = power * x
        if coeffs[k]:
            acc = acc + power * R.element([coeffs[k]], prec=INF_PREC)
    return acc.with_prec(prec)


def hf_formal_diff(x: HFElement, y: HFElement, pack=None) -> HFElement:
    return hf_formal_sum(x, hf_formal_neg(y, pack), pack)
