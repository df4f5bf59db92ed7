"""Fixed-precision arithmetic in Z_p and its unramified extensions Z_q.

Elements carry an explicit absolute precision: a value known modulo
p^prec.  Negative valuations are allowed (the numerator is stored with a
power-of-p denominator) because several later constructions divide by
powers of the uniformizer.

For ``m == 1`` the raw numerator is a plain ``int``.  For ``m > 1`` it is a
:class:`ZqInt`, a tuple of integer coordinates in the power basis of the
defining polynomial.  Both kinds support ``+ - *``, ``% int`` and exact
``// int`` so the series and tower code can be written once.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import sympy

from .errors import (DivisionByZeroDivisor, NonPrime, PrecisionExhausted,
                     UnsupportedEvenPrime, ZeroResidue)

INF = float("inf")


# ---------------------------------------------------------------------------
# raw values: ints or ZqInt
# ---------------------------------------------------------------------------

class ZqInt:
    """Integer polynomial in y modulo a monic defining polynomial.

    No p-adic reduction happens implicitly; callers reduce with ``% M``.
    """

    __slots__ = ("c", "poly")

    def __init__(self, c, poly):
        self.c = tuple(c)
        self.poly = poly  # monic, low-to-high, length m + 1

    # arithmetic -----------------------------------------------------------
    def _wrap(self, other):
        if isinstance(other, ZqInt):
            return other.c
        return (other,) + (0,) * (len(self.c) - 1)

    def __add__(self, other):
        o = self._wrap(other)
        return ZqInt([a + b for a, b in zip(self.c, o)], self.poly)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._wrap(other)
        return ZqInt([a - b for a, b in zip(self.c, o)], self.poly)

    def __rsub__(self, other):
        o = self._wrap(other)
        return ZqInt([b - a for a, b in zip(self.c, o)], self.poly)

    def __neg__(self):
        return ZqInt([-a for a in self.c], self.poly)

    def __mul__(self, other):
        if not isinstance(other, ZqInt):
            return ZqInt([a * other for a in self.c], self.poly)
        m = len(self.c)
        prod = [0] * (2 * m - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    prod[i + j] += a * b
        poly = self.poly
        for k in range(2 * m - 2, m - 1, -1):
            t = prod[k]
            if t:
                for j in range(m):
                    prod[k - m + j] -= t * poly[j]
        return ZqInt(prod[:m], poly)

    __rmul__ = __mul__

    def __mod__(self, M):
        return ZqInt([a % M for a in self.c], self.poly)

    def __floordiv__(self, d):
        return ZqInt([a // d for a in self.c], self.poly)

    def __eq__(self, other):
        if isinstance(other, ZqInt):
            return self.c == other.c
        if other == 0:
            return not any(self.c)
        return self.c == self._wrap(other)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __bool__(self):
        return any(self.c)

    def __hash__(self):
        return hash(self.c)

    def __repr__(self):
        return f"ZqInt({list(self.c)})"


def raw_val(x, p):
    """p-adic valuation of a raw integer value (INF for zero)."""
    if isinstance(x, ZqInt):
        vals = [_int_val(a, p) for a in x.c if a]
        return min(vals) if vals else INF
    return _int_val(x, p) if x else INF


def _int_val(a, p):
    v = 0
    while a % p == 0:
        a //= p
        v += 1
    return v


def raw_divisible(x, pk):
    if isinstance(x, ZqInt):
        return all(a % pk == 0 for a in x.c)
    return x % pk == 0


# ---------------------------------------------------------------------------
# ring
# ---------------------------------------------------------------------------

def _poly_mulmod_fp(a, b, P, p):
    m = len(P) - 1
    prod = [0] * (2 * m - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] = (prod[i + j] + x * y) % p
    for k in range(2 * m - 2, m - 1, -1):
        t = prod[k]
        if t:
            for j in range(m):
                prod[k - m + j] = (prod[k - m + j] - t * P[j]) % p
    return prod[:m]


def _poly_pow_fp(a, e, P, p):
    m = len(P) - 1
    result = [1] + [0] * (m - 1)
    base = list(a)
    while e:
        if e & 1:
            result = _poly_mulmod_fp(result, base, P, p)
        base = _poly_mulmod_fp(base, base, P, p)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def _primitive_poly(p, m):
    """First monic primitive polynomial of degree m over F_p, lexicographic."""
    q = p ** m
    primes = sympy.primefactors(q - 1)
    y = [0, 1] + [0] * (m - 2)
    one = [1] + [0] * (m - 1)
    for tail in itertools.product(range(p), repeat=m):
        P = list(tail) + [1]
        if P[0] == 0:
            continue
        if _poly_pow_fp(y, q - 1, P, p) != one:
            continue
        if all(_poly_pow_fp(y, (q - 1) // r, P, p) != one for r in primes):
            return tuple(P)
    raise AssertionError("no primitive polynomial found")  # pragma: no cover


class PadicRing:
    """Z_q = Z_p[y]/(P(y)) modulo p^N, q = p^m."""

    def __init__(self, p: int, m: int = 1, N: int = 20):
        if p == 2:
            raise UnsupportedEvenPrime("p = 2 is not supported")
        if p < 2 or not sympy.isprime(p):
            raise NonPrime(f"{p} is not prime")
        if m < 1 or N < 1:
            raise ValueError("need m >= 1 and N >= 1")
        self.p, self.m, self.N = p, m, N
        self.q = p ** m
        self.modulus = p ** N
        if m == 1:
            self.defining_poly = (0, 1)
            self._sigma_images = None
        else:
            self.defining_poly = _primitive_poly(p, m)
            self._sigma_images = self._frobenius_images()

    # raw helpers ----------------------------------------------------------
    def raw(self, value):
        if self.m == 1:
            return int(value)
        if isinstance(value, ZqInt):
            return value
        if isinstance(value, (list, tuple)):
            c = list(value) + [0] * (self.m - len(value))
            return ZqInt(c, self.defining_poly)
        return ZqInt([int(value)] + [0] * (self.m - 1), self.defining_poly)

    def raw_zero(self):
        return self.raw(0)

    def raw_inv_unit(self, x, k):
        """Inverse of a unit raw value modulo p^k."""
        p = self.p
        if self.m == 1:
            if x % p == 0:
                raise DivisionByZeroDivisor("not a unit")
            return pow(x, -1, p ** k)
        xr = [a % p for a in x.c]
        if not any(xr):
            raise DivisionByZeroDivisor("not a unit")
        inv = ZqInt(_poly_pow_fp(xr, self.q - 2, self.defining_poly, p),
                    self.defining_poly)
        prec = 1
        while prec < k:
            prec = min(2 * prec, k)
            M = p ** prec
            inv = (inv * (2 - x * inv)) % M
        return inv % (p ** k)

    def raw_pow(self, x, e, M):
        result = self.raw(1)
        base = x % M
        while e:
            if e & 1:
                result = (result * base) % M
            base = (base * base) % M
            e >>= 1
        return result

    def raw_sigma(self, x, M):
        if self.m == 1:
            return x % M
        acc = self.raw(x.c[0])
        for c, img in zip(x.c[1:], self._sigma_images[1:]):
            if c:
                acc = acc + img * c
        return acc % M

    def _frobenius_images(self):
        """sigma(y^i) modulo p^N: Newton refinement of the root near y^p."""
        P = self.defining_poly
        m, p, M = self.m, self.p, self.modulus
        y = self.raw([0, 1])

        def ev(coeffs, z):
            acc = self.raw(0)
            for c in reversed(coeffs):
                acc = (acc * z + c) % M
            return acc

        dP = [i * P[i] for i in range(1, m + 1)]
        z = self.raw_pow(y, p, M)
        for _ in range(max(1, self.N.bit_length() + 1)):
            z = (z - ev(P, z) * self.raw_inv_unit(ev(dP, z), self.N)) % M
        imgs = [self.raw(1)]
        for _ in range(1, m):
            imgs.append((imgs[-1] * z) % M)
        return imgs

    # element constructors -------------------------------------------------
    def __call__(self, value, prec=None):
        return PadicElement(self, self.raw(value), self.N if prec is None else prec)

    def zero(self, prec=None):
        return self(0, prec)

    def one(self, prec=None):
        return self(1, prec)

    def from_rational(self, num: int, den: int, prec=None):
        """The element num/den; den may contain powers of p."""
        prec = self.N if prec is None else prec
        k = _int_val(den, self.p)
        u = den // self.p ** k
        val = num * pow(u, -1, self.p ** (prec + k))
        return PadicElement(self, self.raw(val), prec, den=k)

    def teichmuller(self, r):
        """The (q-1)-th root of unity reducing to the residue r."""
        rr = self.raw(r) % self.p
        if not rr:
            raise ZeroResidue("Teichmüller lift of zero residue")
        M = self.modulus
        x = rr
        for _ in range(self.N + 1):
            x = self.raw_pow(x, self.q, M)
        return PadicElement(self, x, self.N)

    def residues(self):
        """All residues of F_q as raw values, deterministic order."""
        if self.m == 1:
            return list(range(self.p))
        return [self.raw(list(t)) for t in itertools.product(range(self.p), repeat=self.m)]

    def __eq__(self, other):
        return (isinstance(other, PadicRing) and self.p == other.p
                and self.m == other.m and self.N == other.N)

    def __hash__(self):
        return hash((self.p, self.m, self.N))

    def __repr__(self):
        base = f"Z_{self.p}" if self.m == 1 else f"Z_{self.q}"
        return f"{base} mod {self.p}^{self.N}"


def ring_new(p: int, m: int, N: int) -> PadicRing:
    return PadicRing(p, m, N)


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------

class PadicElement:
    """num / p^den known modulo p^prec."""

    __slots__ = ("ring", "num", "den", "prec")

    def __init__(self, ring: PadicRing, num, prec: int, den: int = 0):
        p = ring.p
        prec = min(prec, ring.N) if den == 0 else prec
        num = num % (p ** max(prec + den, 0)) if prec + den > 0 else ring.raw(0)
        while den > 0 and num and raw_divisible(num, p):
            num = num // p
            den -= 1
        if not num:
            den = 0
        self.ring, self.num, self.den, self.prec = ring, num, den, prec

    # inspection -----------------------------------------------------------
    def valuation(self):
        v = raw_val(self.num, self.ring.p)
        return INF if v == INF else v - self.den

    def is_zero(self, prec=None):
        t = self.prec if prec is None else prec
        return self.valuation() >= t

    def is_integral(self):
        return self.den == 0

    @property
    def coeffs(self):
        if self.den:
            raise ValueError("element is not integral")
        if self.ring.m == 1:
            return [self.num]
        return list(self.num.c)

    def to_int(self):
        if self.ring.m != 1 or self.den:
            raise ValueError("not an integral Z_p element")
        return self.num

    def residue(self):
        if self.den:
            raise ValueError("element is not integral")
        return self.num % self.ring.p

    def equals_at(self, other, t):
        return (self - other).valuation() >= t

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PadicElement):
            if other.ring != self.ring:
                raise ValueError("elements of different rings")
            return other
        return self.ring(other)

    def __add__(self, other):
        o = self._coerce(other)
        p = self.ring.p
        den = max(self.den, o.den)
        num = self.num * p ** (den - self.den) + o.num * p ** (den - o.den)
        return PadicElement(self.ring, num, min(self.prec, o.prec), den)

    __radd__ = __add__

    def __neg__(self):
        return PadicElement(self.ring, -self.num, self.prec, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        va, vb = self.valuation(), o.valuation()
        prec = min(self.prec + min(0, vb), o.prec + min(0, va))
        return PadicElement(self.ring, self.num * o.num, prec, self.den + o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        vy = o.valuation()
        if vy == INF or vy >= o.prec:
            raise DivisionByZeroDivisor("divisor is zero at its precision")
        vx = self.valuation()
        prec = self.prec - vy
        if vx != INF:
            prec = min(prec, o.prec + vx - 2 * vy)
        if prec < 1:
            raise PrecisionExhausted(f"quotient precision {prec} < 1")
        p = self.ring.p
        ov = raw_val(o.num, p)
        unit = o.num // p ** ov
        work = prec + self.den + ov + 2
        inv = self.ring.raw_inv_unit(unit % p ** work, work)
        den = self.den + ov - (o.den)
        num = self.num * inv
        if den < 0:
            num = num * p ** (-den)
            den = 0
        return PadicElement(self.ring, num, prec, den)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, e: int):
        if e < 0:
            return self.ring.one() / (self ** (-e))
        result = self.ring.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, (PadicElement, int)):
            return NotImplemented
        o = self._coerce(other)
        return (self - o).valuation() >= min(self.prec, o.prec)

    def __hash__(self):
        return hash((self.ring.p, self.den))

    def frobenius(self):
        M = self.ring.p ** (self.prec + self.den)
        return PadicElement(self.ring, self.ring.raw_sigma(self.num, M), self.prec, self.den)

    def with_prec(self, prec):
        return PadicElement(self.ring, self.num, min(prec, self.prec), self.den)

    # serialization --------------------------------------------------------
    def to_json(self):
        c = [self.num] if self.ring.m == 1 else list(self.num.c)
        out = {"coeffs": [int(a) for a in c], "prec": int(self.prec)}
        if self.den:
            out["den"] = int(self.den)
        return out

    def __repr__(self):
        c = self.num if self.ring.m == 1 else list(self.num.c)
        d = f"/{self.ring.p}^{self.den}" if self.den else ""
        return f"{c}{d} + O({self.ring.p}^{self.prec})"


def arith(x: PadicElement, y: PadicElement, op: str) -> PadicElement:
    if op == "add":
        return x + y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    if op == "neg":
        return -x
    raise ValueError(f"unknown op {op}")


def frobenius(x: PadicElement) -> PadicElement:
    return x.frobenius()


def teichmuller(ring: PadicRing, r) -> PadicElement:
    return ring.teichmuller(r)
