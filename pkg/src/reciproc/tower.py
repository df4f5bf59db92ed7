"""Arithmetic in the Lubin–Tate tower O_{K_s} = Z_q[x]/(phi_s).

Elements are coefficient vectors in the basis 1, x, ..., x^(m_s - 1) with a
common power-of-p denominator.  Precision is absolute and measured in units
of the level-s valuation (v(x) = 1), so an element with precision P is known
modulo x^P.
"""
from __future__ import annotations

import itertools
import math
import threading

from .errors import (DegreeCapTooSmall, IndistinguishableFromZero, LevelOrder,
                     NonUnitResidue, NotATorsionPoint, NotEisenstein,
                     PrecisionExhausted, DivisionByZeroDivisor)
from .padic import INF, PadicElement, ZqInt, raw_val, raw_divisible
from .series import kmul


def _ceil_div(a, b):
    return -((-a) // b)


def _is_zero_raw(c):
    return not c


def poly_mul(a, b, M):
    """Full product of raw coefficient lists modulo M."""
    if not a or not b:
        return []
    if isinstance(a[0], int) and isinstance(b[0], int) and all(isinstance(c, int) for c in b):
        return kmul([c % M for c in a], [c % M for c in b], M)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = out[i + j] + x * y
    return [c % M for c in out]


def poly_divmod(a, b, M, inv_lead):
    """Quotient and remainder of raw polynomials; b has a unit leading coefficient."""
    a = [c % M for c in a]
    db = len(b) - 1
    if len(a) - 1 < db:
        return [0], a
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] % M
        if not c:
            continue
        t = (c * inv_lead) % M
        q[k - db] = t
        for j in range(db + 1):
            a[k - db + j] = (a[k - db + j] - t * b[j]) % M
    return q, a[:db]


def poly_compose(outer, inner, M):
    acc = [0]
    for c in reversed(outer):
        acc = poly_mul(acc, inner, M) if any(acc) else [0]
        acc[0] = (acc[0] + c) % M
    while len(acc) > 1 and not acc[-1]:
        acc.pop()
    return acc


def _trim(a):
    a = list(a)
    while len(a) > 1 and not a[-1]:
        a.pop()
    return a


class Tower:
    """Levels K_1, K_2, ... of the torsion tower of one formal group."""

    def __init__(self, pack, N=None):
        self.pack = pack
        self.N = pack.N if N is None else N
        self._levels = {}
        self._lock = threading.Lock()

    def level(self, s) -> "TowerRing":
        with self._lock:
            r = self._levels.get(s)
        if r is None:
            r = TowerRing(self.pack, s, self.N, tower=self)
            with self._lock:
                self._levels.setdefault(s, r)
                r = self._levels[s]
        return r


def tower_build(pack, s, N=None) -> "TowerRing":
    return Tower(pack, N).level(s)


class TowerRing:
    """O_{K_s} for the tower of ``pack``; ``N`` is the default precision in p-digits."""

    def __init__(self, pack, s, N=None, tower=None):
        if s < 1:
            raise ValueError("level must be >= 1")
        self.pack = pack
        self.base = pack.ring
        self.p, self.q = pack.p, pack.q
        self.s = s
        self.m = self.q ** s - self.q ** (s - 1)
        self.N = pack.N if N is None else N
        self.P = self.m * self.N
        self.tower = tower if tower is not None else Tower(pack, self.N)
        if tower is None:
            self.tower._levels[s] = self
        self.Mc = self.p ** pack.W
        if not pack.f_is_polynomial:
            top = max(i for i, c in enumerate(pack.f_list) if c)
            if top > self.q:
                raise NotEisenstein("only polynomial f of degree q is supported for towers")
        self._fpoly = _trim([c % self.Mc for c in pack.f_list])
        if len(self._fpoly) - 1 != self.q:
            raise NotEisenstein("f must have degree q for the tower construction")
        if pack.D < self.q ** s and s > 1:
            pass  # the tower uses exact polynomial iterates, not the series cap
        self.phi = self._build_phi()
        self._check_eisenstein()
        self._cache = {}
        self._lock = threading.Lock()
        # power sums of the roots of phi, for traces
        self._power_sums = self._newton_sums()
        d = self.poly_eval_exact(self._deriv(self.phi), self.gen())
        self.different_exponent = d.valuation()

    # construction ---------------------------------------------------------
    def _iterate_f(self, k):
        M = self.Mc
        g = [0, 1]
        for _ in range(k):
            g = poly_compose(self._fpoly, g, M)
        return _trim(g)

    def _build_phi(self):
        M = self.Mc
        top = self._iterate_f(self.s)
        bot = self._iterate_f(self.s - 1)
        inv_lead = self.base.raw_inv_unit(bot[-1], self.pack.W)
        quo, rem = poly_divmod(top, bot, M, inv_lead)
        if any(c % M for c in rem):
            raise NotEisenstein("f^(s-1) does not divide f^(s)")
        quo = _trim(quo)
        if len(quo) - 1 != self.m:
            raise NotEisenstein("unexpected degree of phi_s")
        lead_inv = self.base.raw_inv_unit(quo[-1], self.pack.W)
        return [(c * lead_inv) % M for c in quo]

    def _check_eisenstein(self):
        p = self.p
        phi = self.phi
        if raw_val(phi[0], p) != 1:
            raise NotEisenstein("constant term of phi_s must have valuation 1")
        for c in phi[1:-1]:
            if not raw_divisible(c, p):
                raise NotEisenstein("phi_s has a non-divisible middle coefficient")

    def _deriv(self, poly):
        return [(i * poly[i]) % self.Mc for i in range(1, len(poly))]

    def _newton_sums(self):
        """S_k = sum of k-th powers of the roots of phi, k < m."""
        m, M = self.m, self.Mc
        a = self.phi  # a[m] = 1
        S = [self.base.raw(m) % M]
        for k in range(1, m):
            acc = k * a[m - k]
            for i in range(1, k):
                acc = acc + a[m - i] * S[k - i]
            S.append((-acc) % M)
        return S

    # raw helpers ----------------------------------------------------------
    def reduce(self, c, M):
        """Reduce a raw polynomial modulo phi (monic)."""
        m, phi = self.m, self.phi
        c = [x % M for x in c]
        for k in range(len(c) - 1, m - 1, -1):
            t = c[k]
            if t:
                for j in range(m):
                    if phi[j]:
                        c[k - m + j] = (c[k - m + j] - t * phi[j]) % M
        c = c[:m]
        return c + [self.base.raw(0)] * (m - len(c))

    def mulmod(self, a, b, M):
        return self.reduce(poly_mul(a, b, M), M)

    def times_x(self, a, M):
        """a * x reduced, for a raw vector of length m."""
        top = a[-1]
        out = [self.base.raw(0)] + list(a[:-1])
        if top:
            for j in range(self.m):
                if self.phi[j]:
                    out[j] = (out[j] - top * self.phi[j]) % M
        return [c % M for c in out]

    # element constructors -------------------------------------------------
    def element(self, coeffs, prec=None, den=0):
        c = [self.base.raw(x) if not isinstance(x, (ZqInt,)) else x for x in coeffs]
        c = c + [self.base.raw(0)] * (self.m - len(c))
        if len(c) > self.m:
            M = self.p ** (self.N + den + 4 + _ceil_div(len(c), self.m))
            c = self.reduce(c, M)
        return TowerElement(self, c, self.P if prec is None else prec, den)

    def zero(self, prec=None):
        return self.element([0], prec)

    def one(self, prec=None):
        return self.element([1], prec)

    def gen(self, prec=None):
        if self.m == 1:
            return self.element([(-self.phi[0])], prec)
        return self.element([0, 1], prec)

    def from_base(self, x):
        if isinstance(x, TowerElement):
            return x
        if isinstance(x, PadicElement):
            return TowerElement(self, [x.num] + [self.base.raw(0)] * (self.m - 1),
                                x.prec * self.m, x.den)
        return self.element([x])

    @property
    def pi(self):
        return self.from_base(self.pack.pi)

    # evaluation of series at points ---------------------------------------
    def eval_series(self, coeffs, point, den=0, series_prec=None, tail_bound=None):
        """Sum coeffs[k] * point^k / p^den.

        ``tail_bound`` is a lower bound for the valuation of the omitted tail
        (in level-s units); by default the series is assumed integral past its
        last coefficient.
        """
        pt = self.coerce(point)
        v = pt.valuation()
        if v == INF:
            v = pt.prec
        if v < 1 and len(coeffs) > 1:
            raise ValueError("point must have positive valuation")
        D = len(coeffs) - 1
        tail = (D + 1) * v if tail_bound is None else tail_bound
        target = min(tail, pt.prec)
        if series_prec is not None:
            target = min(target, series_prec * self.m)
        # numerators: point = A / p^e
        e = pt.den
        work = _ceil_div(target, self.m) + den + e * D + 2
        M = self.p ** max(work, 1)
        A = [c % M for c in pt.c]
        acc = [self.base.raw(0)] * self.m
        scale = self.p ** e
        # Horner on sum c_k A^k p^{e(D-k)} / p^{eD}
        pw = 1
        for k in range(D, -1, -1):
            acc = self.mulmod(acc, A, M) if any(acc) else acc
            c = coeffs[k] % M if coeffs[k] else 0
            if c:
                acc[0] = (acc[0] + c * pw) % M
            pw = (pw * scale) % M
        return TowerElement(self, acc, target - 0, den + e * D)

    def poly_eval_exact(self, poly, point):
        """Evaluate an exact polynomial (raw coefficients) at an element."""
        pt = self.coerce(point)
        acc = self.zero(prec=INF_PREC)
        for c in reversed(poly):
            acc = acc * pt + self.element([c], prec=INF_PREC)
        return acc

    def coerce(self, x):
        if isinstance(x, TowerElement):
            if x.ring is not self:
                raise ValueError("element of a different level")
            return x
        return self.from_base(x if isinstance(x, PadicElement) else self.base(x))

    # structure ------------------------------------------------------------
    def different_valuation(self):
        """v_{K_s}(phi_s'(x)), the exponent of the different of K_s/K."""
        return self.different_exponent

    def expected_different(self):
        return self.s * self.m - self.q ** (self.s - 1)

    def x_image_from(self, s):
        """x_s = f^(t - s)(x_t) as a level-t element (self is level t)."""
        key = ("xim", s)
        with self._lock:
            hit = self._cache.get(key)
        if hit is None:
            poly = self._iterate_f(self.s - s)
            hit = self.element(self.reduce(poly, self.Mc), prec=INF_PREC)
            with self._lock:
                self._cache[key] = hit
        return hit

    def endo_image(self, a, prec=None):
        """[a]_f(x) as an element of this level (a raw or integer)."""
        P = self.P if prec is None else prec
        key = ("endo", _key(a), P)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        D = max(P, self.pack.D)
        coeffs = self.pack.endo_list(self.base.raw(a) if not isinstance(a, ZqInt) else a, D)
        prec_series = self.pack.W - (int(math.log(D, self.q)) + 1)
        val = self.eval_series(coeffs, self.gen(), series_prec=prec_series).with_prec(P)
        with self._lock:
            self._cache[key] = val
        return val

    def xinv_numerator(self, digits):
        """Integral Y with x^-1 = Y / p, modulo p^digits."""
        key = ("xinv", digits)
        hit = self._cache.get(key)
        if hit is None:
            M = self.p ** digits
            unit = (self.phi[0] // self.p) % M
            uinv = self.base.raw_inv_unit(unit, digits)
            # x (x^(m-1) + a_(m-1) x^(m-2) + ... + a_1) = -a_0
            hit = [(-self.phi[i + 1] * uinv) % M for i in range(self.m)]
            self._cache[key] = hit
        return hit

    def __repr__(self):
        return f"TowerRing(level={self.s}, degree={self.m}, {self.pack!r})"


def _div_by_x(ring, w, M, Y):
    """w / x for an integral vector w with p | w[0]; x^-1 = Y / p."""
    p = ring.p
    w0 = w[0]
    if w0 and not raw_divisible(w0 % M, p):
        raise PrecisionExhausted("cannot divide by the uniformizer")
    shifted = list(w[1:]) + [ring.base.raw(0)]
    if w0:
        t = (w0 // p) % M
        shifted = [(a + t * b) % M for a, b in zip(shifted, Y)]
    return shifted


INF_PREC = 10 ** 9


def _key(a):
    if isinstance(a, ZqInt):
        return a.c
    if isinstance(a, PadicElement):
        return ("el", a.num if not isinstance(a.num, ZqInt) else a.num.c, a.den)
    return a


class TowerElement:
    __slots__ = ("ring", "c", "prec", "den")

    def __init__(self, ring: TowerRing, coeffs, prec, den=0):
        p = ring.p
        c = list(coeffs)
        while den > 0 and any(c) and all(raw_divisible(x, p) for x in c):
            c = [x // p for x in c]
            den -= 1
        if not any(c):
            den = 0
        if prec < INF_PREC:
            k = _ceil_div(prec, ring.m) + den
            if k <= 0:
                raise PrecisionExhausted("element carries no information")
            M = p ** k
            c = [x % M for x in c]
            if not any(c):
                den = 0
        self.ring, self.c, self.prec, self.den = ring, c, prec, den

    # inspection -----------------------------------------------------------
    def valuation(self):
        p, m = self.ring.p, self.ring.m
        best = INF
        for i, x in enumerate(self.c):
            if x:
                v = raw_val(x, p)
                if v != INF:
                    best = min(best, m * v + i)
        if best == INF:
            return INF
        best -= m * self.den
        return INF if best >= self.prec else best

    def _vlow(self):
        v = self.valuation()
        return self.prec if v == INF else v

    def is_zero(self, prec=None):
        t = self.prec if prec is None else prec
        v = self.valuation()
        return v == INF or v >= t

    def equals_at(self, other, t):
        d = self - other
        return d.valuation() == INF and d.prec >= t or d.valuation() >= t

    def with_prec(self, prec):
        return TowerElement(self.ring, self.c, min(prec, self.prec), self.den)

    def is_base(self):
        return all(not x for x in self.c[1:])

    def to_base(self) -> PadicElement:
        """The element as a member of K (requires only a constant coefficient)."""
        m = self.ring.m
        for i, x in enumerate(self.c[1:], start=1):
            if x and m * raw_val(x, self.ring.p) + i - m * self.den < self.prec:
                raise ValueError("element does not lie in K")
        return PadicElement(self.ring.base, self.c[0], self.prec // m, self.den)

    def coefficient_list(self):
        return list(self.c)

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TowerElement):
            if other.ring is not self.ring:
                raise ValueError("elements at different levels")
            return other
        if isinstance(other, PadicElement):
            return self.ring.from_base(other)
        return self.ring.element([other], prec=INF_PREC)

    def _modulus(self, prec, den):
        if prec >= INF_PREC:
            return None
        return self.ring.p ** max(_ceil_div(prec, self.ring.m) + den, 1)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.ring.p
        den = max(self.den, o.den)
        sa, sb = p ** (den - self.den), p ** (den - o.den)
        c = [x * sa + y * sb for x, y in zip(self.c, o.c)]
        return TowerElement(self.ring, c, min(self.prec, o.prec), den)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.ring, [-x for x in self.c], self.prec, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        prec = min(_add_prec(self.prec, o._vlow()), _add_prec(o.prec, self._vlow()))
        den = self.den + o.den
        M = self._modulus(prec, den)
        if M is None:
            M = self.ring.p ** (self.ring.pack.W + den + 8)
            prec_out = INF_PREC
        else:
            prec_out = prec
        c = self.ring.mulmod(self.c, o.c, M)
        return TowerElement(self.ring, c, prec_out, den)

    __rmul__ = __mul__

    def inverse(self):
        ring = self.ring
        p, m = ring.p, ring.m
        v = self.valuation()
        if v == INF:
            raise DivisionByZeroDivisor("element is zero at its precision")
        vB = v + m * self.den  # valuation of the integral numerator
        rel = self.prec - v
        prec_out = self.prec - 2 * v if self.prec < INF_PREC else INF_PREC
        out_digits = _ceil_div(max(min(prec_out, ring.m * ring.pack.W), 0), m)
        digits = out_digits + vB + self.den + 4
        M = p ** digits
        Y = ring.xinv_numerator(digits)
        w = [x % M for x in self.c]
        for _ in range(vB):
            w = _div_by_x(ring, w, M, Y)
        if not (w[0] % p):
            raise PrecisionExhausted("unit part lost")
        y = [ring.base.raw_inv_unit(w[0] % M, digits)] + [ring.base.raw(0)] * (m - 1)
        have = 1
        goal = min(rel, m * digits) + 1
        while have < goal:
            wy = ring.mulmod(w, y, M)
            corr = [(-c) % M for c in wy]
            corr[0] = (corr[0] + 2) % M
            y = ring.mulmod(y, corr, M)
            have *= 2
        # 1/self = p^den * y * (Y / p)^vB
        num = y
        for _ in range(vB):
            num = ring.mulmod(num, Y, M)
        num = [(c * p ** self.den) for c in num]
        return TowerElement(ring, num, prec_out, vB)

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, e):
        if e < 0:
            return (self ** (-e)).inverse()
        result = self.ring.element([1], prec=INF_PREC)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        o = self._coerce(other)
        d = self - o
        return d.is_zero()

    def __hash__(self):
        return hash((self.ring.s, self.den))

    def derivative(self):
        """g'(x) for the canonical polynomial g of the element."""
        ring = self.ring
        c = [(i * self.c[i]) for i in range(1, ring.m)] + [ring.base.raw(0)]
        prec = self.prec - 1
        return TowerElement(ring, c, prec, self.den)

    def to_json(self):
        def enc(x):
            return [int(a) for a in x.c] if isinstance(x, ZqInt) else int(x)
        out = {"level": self.ring.s, "coeffs": [enc(x) for x in self.c],
               "prec": int(min(self.prec, 10 ** 6))}
        if self.den:
            out["den"] = self.den
        return out

    def __repr__(self):
        return f"TowerElement(level={self.ring.s}, {self.to_json()})"


def _add_prec(P, v):
    if P >= INF_PREC:
        return INF_PREC
    return P + v


# ---------------------------------------------------------------------------
# valuations, embeddings, trace and norm
# ---------------------------------------------------------------------------

def tower_valuation(a: TowerElement) -> int:
    v = a.valuation()
    if v == INF:
        raise IndistinguishableFromZero("element is zero at its precision")
    return v


def embed_up(a: TowerElement, t: int) -> TowerElement:
    s = a.ring.s
    if t < s:
        raise LevelOrder(f"cannot embed level {s} into level {t}")
    if t == s:
        return a
    R = a.ring.tower.level(t)
    y = R.x_image_from(s)
    r = a.ring.q ** (t - s)
    prec = a.prec * r if a.prec < INF_PREC else INF_PREC
    acc = R.element([0], prec=INF_PREC)
    for c in reversed(a.c):
        acc = acc * y + R.element([c], prec=INF_PREC)
    return TowerElement(R, acc.c, prec, a.den)


def relative_coordinates(a: TowerElement, s: int):
    """Coordinates of a level-t element over level s in the basis x_t^i, i < q^(t-s)."""
    R = a.ring
    t = R.s
    if s > t:
        raise LevelOrder("target level above source level")
    S = R.tower.level(s)
    r = R.q ** (t - s)
    h = R._iterate_f(t - s)
    M = R.p ** (_ceil_div(min(a.prec, 10 ** 6), R.m) + a.den + 2) if a.prec < INF_PREC else \
        R.p ** (R.N + a.den + 8)
    inv_lead = R.base.raw_inv_unit(h[-1] % M, int(round(math.log(M, R.p))))
    rem_chunks = []
    cur = [x % M for x in a.c]
    while any(cur):
        quo, rem = poly_divmod(cur, h, M, inv_lead)
        rem_chunks.append(rem + [0] * (r - len(rem)))
        cur = _trim(quo) if any(quo) else []
    out = []
    for i in range(r):
        coeffs = [chunk[i] for chunk in rem_chunks] or [0]
        if len(coeffs) > S.m:
            raise ValueError("relative expansion longer than expected")
        # exact inputs were reduced mod p^(N + den + 8): report that precision
        prec = _ceil_div(a.prec - i, r) if a.prec < INF_PREC else S.m * (R.N + 8)
        out.append(TowerElement(S, coeffs + [S.base.raw(0)] * (S.m - len(coeffs)), prec, a.den))
    return out


def _base_trace(a: TowerElement) -> PadicElement:
    R = a.ring
    M = R.Mc
    acc = 0
    for c, Sk in zip(a.c, R._power_sums):
        if c:
            acc = acc + c * Sk
    prec = (a.prec + R.different_exponent) // R.m if a.prec < INF_PREC else R.pack.W
    prec = min(prec, R.pack.W - a.den)
    return PadicElement(R.base, acc % M if not isinstance(acc, int) else acc % M, prec, a.den)


def _det(rows, one):
    """Determinant by elimination with minimal-valuation pivoting."""
    n = len(rows)
    A = [list(r) for r in rows]
    det = one
    sign = 1
    for col in range(n):
        best, bv = None, INF
        for r in range(col, n):
            v = A[r][col].valuation()
            if v != INF and v < bv:
                best, bv = r, v
        if best is None:
            return one * 0
        if best != col:
            A[col], A[best] = A[best], A[col]
            sign = -sign
        piv = A[col][col]
        det = det * piv
        for r in range(col + 1, n):
            if A[r][col].valuation() == INF:
                continue
            factor = A[r][col] / piv
            A[r] = [A[r][k] - factor * A[col][k] if k >= col else A[r][k] for k in range(n)]
    return det if sign == 1 else -det


def trace_norm(a: TowerElement, s: int, which: str = "trace"):
    """Trace or norm from the level of ``a`` down to level ``s`` (0 means K)."""
    R = a.ring
    t = R.s
    if s > t:
        raise LevelOrder("target level above source level")
    if s == t:
        return a
    if s == 0:
        if which == "trace":
            return _base_trace(a)
        # multiplication matrix over Z_q; numerators are treated as exact
        # representatives and the precision is set from the perturbation bound
        W = R.pack.W
        M = R.p ** (W + a.den * R.m + 4)
        cols = []
        cur = [c % M for c in a.c]
        for _ in range(R.m):
            cols.append(cur)
            cur = R.times_x(cur, M)
        rows = [[PadicElement(R.base, cols[j][i], W + a.den * R.m + 4) for j in range(R.m)]
                for i in range(R.m)]
        det = _det(rows, PadicElement(R.base, R.base.raw(1), W + a.den * R.m + 4))
        va = a.valuation()
        if va == INF:
            raise IndistinguishableFromZero("norm of an element that is zero at its precision")
        prec = va + _ceil_div(a.prec - va, R.m) if a.prec < INF_PREC else W
        return PadicElement(R.base, det.num, min(prec, W), R.m * a.den)
    r = R.q ** (t - s)
    x = R.gen(prec=INF_PREC)
    cols = []
    cur = a
    for _ in range(r):
        cols.append(relative_coordinates(cur, s))
        cur = cur * x
    if which == "trace":
        acc = cols[0][0]
        for j in range(1, r):
            acc = acc + cols[j][j]
        return acc
    rows = [[cols[j][i] for j in range(r)] for i in range(r)]
    S = R.tower.level(s)
    return _det(rows, S.one(prec=INF_PREC))


# ---------------------------------------------------------------------------
# Galois action and torsion points
# ---------------------------------------------------------------------------

def _residue_unit(ring, c):
    raw = ring.base.raw(c) if not isinstance(c, ZqInt) else c
    if not (raw % ring.p):
        raise NonUnitResidue(f"{c} is not a unit residue")
    return raw


def galois_apply(c, a: TowerElement) -> TowerElement:
    R = a.ring
    raw = _residue_unit(R, c)
    img = R.endo_image(raw % R.p ** R.s if isinstance(raw, int) else raw % R.p ** R.s,
                       prec=min(a.prec, R.P) if a.prec < INF_PREC else R.P)
    acc = R.element([0], prec=INF_PREC)
    for coeff in reversed(a.c):
        acc = acc * img + R.element([coeff], prec=INF_PREC)
    return TowerElement(R, acc.c, min(a.prec, img.prec), a.den)


class TorsionCoord:
    """Residue c in C / pi^n naming the torsion point [c]_f(e_{f,n})."""

    __slots__ = ("c", "n", "p", "m")

    def __init__(self, c, n, p, m=1):
        M = p ** n
        if isinstance(c, ZqInt):
            self.c = tuple(int(x) % M for x in c.c)
        elif isinstance(c, (tuple, list)):
            self.c = tuple(int(x) % M for x in c) + (0,) * (m - len(c))
        else:
            self.c = (int(c) % M,) + (0,) * (m - 1)
        self.n, self.p, self.m = n, p, m

    @property
    def value(self):
        return self.c[0] if self.m == 1 else self.c

    def raw(self, ring):
        return ring.raw(list(self.c)) if self.m > 1 else self.c[0]

    def _check(self, other):
        if not isinstance(other, TorsionCoord) or (other.n, other.p, other.m) != (self.n, self.p, self.m):
            raise ValueError("incompatible torsion coordinates")

    def __add__(self, other):
        self._check(other)
        return TorsionCoord([a + b for a, b in zip(self.c, other.c)], self.n, self.p, self.m)

    def __sub__(self, other):
        self._check(other)
        return TorsionCoord([a - b for a, b in zip(self.c, other.c)], self.n, self.p, self.m)

    def __neg__(self):
        return TorsionCoord([-a for a in self.c], self.n, self.p, self.m)

    def __eq__(self, other):
        if isinstance(other, int):
            return self.m == 1 and self.c[0] == other % self.p ** self.n
        return isinstance(other, TorsionCoord) and (self.c, self.n, self.p) == (other.c, other.n, other.p)

    def __hash__(self):
        return hash((self.c, self.n, self.p))

    def to_json(self):
        return {"coord": list(self.c) if self.m > 1 else self.c[0], "n": self.n}

    def __repr__(self):
        return f"TorsionCoord({self.value} mod pi^{self.n})"


def _coord_reps(ring, k):
    """All residues of C / pi^k as raw values, deterministic order."""
    M = ring.p ** k
    if ring.base.m == 1:
        return list(range(M))
    return [ring.base.raw(list(t)) for t in itertools.product(range(M), repeat=ring.base.m)]


def torsion_point(ring: TowerRing, c, k: int, prec=None) -> TowerElement:
    """[c]_f(e_{f,k}) as an element of ``ring`` (level >= k)."""
    if k > ring.s:
        raise LevelOrder("torsion level above the ambient level")
    raw = ring.base.raw(c) if not isinstance(c, ZqInt) else c
    if not raw % ring.p ** k:
        return ring.zero(prec)
    a = (raw * ring.base.raw_pow(ring.pack.pi_raw, ring.s - k, ring.p ** ring.pack.W)) % ring.p ** ring.s
    return ring.endo_image(a, prec)


def torsion_points(ring: TowerRing, k: int):
    if k > ring.s:
        raise LevelOrder("torsion level above the ambient level")
    out = []
    for c in _coord_reps(ring, k):
        out.append((TorsionCoord(c, k, ring.p, ring.base.m), torsion_point(ring, c, k)))
    return out


def _same_point(a, b, ring):
    thr = ring.q ** (ring.s - 1) + 1
    d = a - b
    if min(a.prec, b.prec) < thr:
        raise NotATorsionPoint("precision too small to separate torsion points")
    v = d.valuation()
    return v == INF or v >= thr


def torsion_dlog(y: TowerElement, n: int) -> TorsionCoord:
    R = y.ring
    if n > R.s:
        raise LevelOrder("torsion level above the ambient level")
    p, base = R.p, R.base
    prec = min(y.prec, R.P)
    known = base.raw(0)
    W = R.pack.W
    for j in range(n):
        # y_j = [pi^(n-1-j)](y) determines c modulo pi^(j+1)
        if n - 1 - j:
            k = base.raw_pow(R.pack.pi_raw, n - 1 - j, p ** W)
            D = max(prec, R.pack.D)
            coeffs = R.pack.endo_list(k, D)
            yj = R.eval_series(coeffs, y, series_prec=W - int(math.log(D, R.q)) - 1).with_prec(prec)
        else:
            yj = y
        found = None
        for d in (_coord_reps(R, 1)):
            cand = (known + d * base.raw_pow(R.pack.pi_raw, j, p ** W)) % p ** (j + 1)
            pt = torsion_point(R, cand, j + 1, prec)
            if _same_point(yj, pt, R):
                found = cand
                break
        if found is None:
            raise NotATorsionPoint("no torsion point matches")
        known = found
    return TorsionCoord(known, n, p, base.m)


# ---------------------------------------------------------------------------
# torsion identities
# ---------------------------------------------------------------------------

def norm_torsion_check(ring: TowerRing, k: int, xdeg: int = 8, min_prec=None):
    """Compare prod_{v in kappa_k} F(X, v) with f^(k)(X) up to X-degree xdeg.

    Returns (lhs, rhs, ok, prec): coefficient lists and the comparison precision.
    """
    pack = ring.pack
    F = pack._F
    D = pack.D
    pts = [pt for _, pt in torsion_points(ring, k)]
    prec = min(pt.prec for pt in pts)
    # F is truncated at total degree D, so X^i coefficients are exact only up
    # to v^(D - i + 1); compare at the precision this leaves
    vmin = min((pt.valuation() for pt in pts if pt.valuation() != INF), default=1)
    prec = min(prec, vmin * (D - xdeg + 1))
    if min_prec is not None and prec < min_prec:
        raise DegreeCapTooSmall(f"degree cap {D} leaves precision {prec} < {min_prec}")
    series = []
    for pt in pts:
        coeffs = []
        powers = [ring.one(prec=INF_PREC)]
        for _ in range(D):
            powers.append(powers[-1] * pt)
        for i in range(xdeg + 1):
            acc = ring.zero(prec=INF_PREC)
            for j in range(0, D - i + 1):
                c = F.get((i, j), 0)
                if c:
                    acc = acc + powers[j] * ring.element([c], prec=INF_PREC)
            coeffs.append(acc.with_prec(prec))
        series.append(coeffs)
    prod = series[0]
    for s in series[1:]:
        out = []
        for d in range(xdeg + 1):
            acc = ring.zero(prec=INF_PREC)
            for i in range(d + 1):
                acc = acc + prod[i] * s[d - i]
            out.append(acc)
        prod = out
    fk = ring._iterate_f(k)
    rhs = [ring.element([fk[i] if i < len(fk) else 0]) for i in range(xdeg + 1)]
    ok = all(a.equals_at(b, prec) for a, b in zip(prod, rhs))
    return prod, rhs, ok, prec


def log_derivative_at(ring: TowerRing, point: TowerElement, pack=None):
    """l'(point) for an integral point of positive valuation."""
    pack = ring.pack if pack is None else pack
    v = point.valuation()
    if v == INF:
        v = point.prec
    D = max(_ceil_div(min(point.prec, ring.P), max(v, 1)) + 1, 2)
    lp = pack.log_derivative_list(D)
    return ring.eval_series(lp, point, series_prec=pack.W - int(math.log(max(D, 2), pack.q)) - 2)


def trace_torsion_check(ring: TowerRing, n: int, k: int, pack_g=None):
    """Both sides of the trace identity for (n, k), computed at level n + k.

    With ``pack_g`` the identity is checked for F_g (xi = its uniformizer).
    """
    pack = ring.pack if pack_g is None else pack_g
    if ring.s != n + k:
        raise LevelOrder("the identity lives at level n + k")
    top = ring if pack_g is None else Tower(pack_g, ring.N).level(n + k)
    xi = top.pi
    e_top = top.gen()
    lhs = None
    for c in _coord_reps(top, k):
        a = (1 + c * top.base.raw_pow(pack.pi_raw, n, top.p ** pack.W)) % top.p ** top.s
        w = top.endo_image(a)  # F(e_{n+k}, [c](e_k)) = [1 + c pi^n](e_{n+k})
        lp = log_derivative_at(top, w)
        term = (xi ** (n + k) * lp * w).inverse()
        lhs = term if lhs is None else lhs + term
    low = top.tower.level(n)
    e_n = low.gen()
    rhs_low = (low.pi ** n * log_derivative_at(low, e_n) * e_n).inverse()
    rhs = embed_up(rhs_low, n + k)
    t = min(lhs.prec, rhs.prec)
    return lhs, rhs, lhs.equals_at(rhs, t)
