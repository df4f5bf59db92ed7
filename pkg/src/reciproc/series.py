"""Truncated multivariate power / Laurent series over Z_q.

A :class:`TruncSeries` stores integer numerators with a shared power-of-p
denominator and a shared absolute precision.  Each variable is either a
``power`` variable (exponents in ``[0, hi]``, optionally with a total
degree cap) or a ``laurent`` variable (exponents in ``[lo, hi]``).

Overflow policy:

* ``strict``: a product term outside the window raises WindowOverflow.
* ``truncate``: such terms are dropped, i.e. arithmetic happens modulo the
  ideal of out-of-window monomials.  Formal-group work uses this with the
  total degree cap.

The second half of the module holds dense univariate helpers (plain lists
of raw numerators modulo ``M``) used by the heavier constructions.
"""
from __future__ import annotations

import math

from .errors import (DivergentSubstitution, NotAUnit, PrecisionExhausted,
                     WindowOverflow)
from .padic import INF, PadicElement, PadicRing, raw_val


class TruncSeries:
    __slots__ = ("ring", "vars", "kinds", "windows", "cap", "policy",
                 "terms", "den", "prec", "is_polynomial")

    def __init__(self, ring: PadicRing, vars, terms=None, *, kinds=None,
                 windows=None, cap=None, policy="strict", den=0, prec=None,
                 is_polynomial=False):
        self.ring = ring
        self.vars = tuple(vars)
        n = len(self.vars)
        self.kinds = tuple(kinds) if kinds else ("power",) * n
        if windows is None:
            windows = []
            for k in self.kinds:
                if k == "power":
                    windows.append((0, cap if cap is not None else 10 ** 9))
                else:
                    raise ValueError("laurent variables need an explicit window")
        self.windows = tuple(tuple(w) for w in windows)
        self.cap = cap
        self.policy = policy
        self.prec = ring.N if prec is None else prec
        self.is_polynomial = is_polynomial
        p = ring.p
        M = p ** (self.prec + den) if self.prec + den > 0 else 1
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            c = c % M
            if c:
                clean[e] = c
        # strip common factors of p from the denominator
        while den > 0 and clean and all(raw_val(c, p) >= 1 for c in clean.values()):
            clean = {e: c // p for e, c in clean.items()}
            den -= 1
        if not clean:
            den = 0
        self.terms = clean
        self.den = den
        self._check_window()

    # construction helpers -------------------------------------------------
    def _like(self, terms, den=None, prec=None, is_polynomial=None):
        return TruncSeries(self.ring, self.vars, terms, kinds=self.kinds,
                           windows=self.windows, cap=self.cap, policy=self.policy,
                           den=self.den if den is None else den,
                           prec=self.prec if prec is None else prec,
                           is_polynomial=self.is_polynomial if is_polynomial is None else is_polynomial)

    @classmethod
    def from_coeffs(cls, ring, var, coeffs, **kw):
        """Univariate series from a list of ints / PadicElements (low to high)."""
        terms = {}
        den = 0
        elems = [c if isinstance(c, PadicElement) else ring(c) for c in coeffs]
        den = max([e.den for e in elems] + [0])
        prec = kw.pop("prec", None)
        if prec is None:
            prec = min([e.prec for e in elems] + [ring.N])
        p = ring.p
        for i, e in enumerate(elems):
            terms[(i,)] = e.num * p ** (den - e.den)
        return cls(ring, (var,), terms, den=den, prec=prec, **kw)

    def _in_window(self, e):
        for x, (lo, hi) in zip(e, self.windows):
            if x < lo or x > hi:
                return False
        if self.cap is not None:
            deg = sum(x for x, k in zip(e, self.kinds) if k == "power")
            if deg > self.cap:
                return False
        return True

    def _check_window(self):
        bad = [e for e in self.terms if not self._in_window(e)]
        if bad:
            if self.policy == "strict":
                raise WindowOverflow(f"exponent {bad[0]} outside window")
            for e in bad:
                del self.terms[e]

    # inspection -----------------------------------------------------------
    def coefficient(self, exp) -> PadicElement:
        exp = tuple(exp)
        return PadicElement(self.ring, self.terms.get(exp, self.ring.raw(0)),
                            self.prec, self.den)

    def valuation(self):
        p = self.ring.p
        vals = [raw_val(c, p) for c in self.terms.values()]
        v = min(vals) if vals else INF
        return INF if v == INF else v - self.den

    def is_zero(self, prec=None):
        t = self.prec if prec is None else prec
        return self.valuation() >= t

    def degree(self):
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def equals_at(self, other, t=None):
        d = self - other
        t = d.prec if t is None else t
        return d.valuation() >= t

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.equals_at(other)

    __hash__ = None

    # arithmetic -----------------------------------------------------------
    def _align(self, other):
        if self.vars != other.vars:
            raise ValueError("incompatible variable lists")
        p = self.ring.p
        den = max(self.den, other.den)
        sa = p ** (den - self.den)
        sb = p ** (den - other.den)
        return den, sa, sb

    def __add__(self, other):
        if not isinstance(other, TruncSeries):
            other = self.constant(other)
        den, sa, sb = self._align(other)
        t = {e: c * sa for e, c in self.terms.items()}
        for e, c in other.terms.items():
            t[e] = t.get(e, 0) + c * sb
        return self._like(t, den=den, prec=min(self.prec, other.prec),
                          is_polynomial=self.is_polynomial and other.is_polynomial)

    __radd__ = __add__

    def __neg__(self):
        return self._like({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, TruncSeries):
            other = self.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.constant(other) - self

    def constant(self, value):
        if isinstance(value, PadicElement):
            return self._like({(0,) * len(self.vars): value.num}, den=value.den,
                              prec=value.prec, is_polynomial=True)
        return self._like({(0,) * len(self.vars): self.ring.raw(value)}, den=0,
                          prec=self.ring.N, is_polynomial=True)

    def scale(self, c: PadicElement):
        va = self.valuation()
        vc = c.valuation()
        prec = min(self.prec + min(0, vc), c.prec + min(0, va))
        return self._like({e: v * c.num for e, v in self.terms.items()},
                          den=self.den + c.den, prec=prec)

    def __mul__(self, other):
        if isinstance(other, PadicElement):
            return self.scale(other)
        if not isinstance(other, TruncSeries):
            return self.scale(self.ring(other))
        if self.vars != other.vars:
            raise ValueError("incompatible variable lists")
        va, vb = self.valuation(), other.valuation()
        prec = min(self.prec + min(0, vb), other.prec + min(0, va))
        den = self.den + other.den
        M = self.ring.p ** (prec + den) if prec + den > 0 else 1
        out = {}
        strict = self.policy == "strict"
        inw = self._in_window
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                if not inw(e):
                    if strict:
                        raise WindowOverflow(f"product exponent {e} outside window")
                    continue
                out[e] = out.get(e, 0) + ca * cb
        out = {e: c % M for e, c in out.items()}
        return self._like(out, den=den, prec=prec,
                          is_polynomial=self.is_polynomial and other.is_polynomial)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        result = self.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def with_prec(self, prec):
        return self._like(dict(self.terms), prec=min(prec, self.prec))

    def with_window(self, windows=None, cap=None, policy=None):
        return TruncSeries(self.ring, self.vars, dict(self.terms), kinds=self.kinds,
                           windows=windows or self.windows,
                           cap=self.cap if cap is None else cap,
                           policy=policy or self.policy, den=self.den, prec=self.prec,
                           is_polynomial=self.is_polynomial)

    # calculus -------------------------------------------------------------
    def derive(self, var) -> "TruncSeries":
        i = self.vars.index(var) if not isinstance(var, int) else var
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                ne = list(e)
                ne[i] -= 1
                out[tuple(ne)] = c * e[i]
        return self._like(out)

    def constant_term(self, var) -> "TruncSeries":
        i = self.vars.index(var) if not isinstance(var, int) else var
        rest = lambda t: t[:i] + t[i + 1:]
        out = {rest(e): c for e, c in self.terms.items() if e[i] == 0}
        return TruncSeries(self.ring, rest(self.vars), out, kinds=rest(self.kinds),
                           windows=rest(self.windows), cap=self.cap, policy=self.policy,
                           den=self.den, prec=self.prec, is_polynomial=self.is_polynomial)

    def invert(self) -> "TruncSeries":
        zero = (0,) * len(self.vars)
        p = self.ring.p
        c0 = self.terms.get(zero, 0)
        if self.den or not c0 or raw_val(c0, p) > 0:
            raise NotAUnit("constant coefficient is not a unit")
        inv0 = PadicElement(self.ring, self.ring.raw_inv_unit(c0, self.prec), self.prec)
        h = self.constant(1) - self.scale(inv0)  # a = c0 (1 - h)
        if h.valuation() == INF or not h.terms:
            return self.constant(inv0)
        acc = self.constant(1)
        power = self.constant(1)
        span = sum(hi - lo for lo, hi in self.windows if hi < 10 ** 8)
        limit = span + (self.cap or 0) + self.prec + 2
        for _ in range(limit):
            power = power * h
            if not power.terms:
                break
            acc = acc + power
        else:
            raise NotAUnit("geometric inverse does not terminate inside the window")
        return acc.scale(inv0)

    # substitution ---------------------------------------------------------
    def compose(self, inner: "TruncSeries", requested_prec=None) -> "TruncSeries":
        """outer(inner) for a univariate outer series."""
        if len(self.vars) != 1:
            raise ValueError("outer series must be univariate")
        zero = (0,) * len(inner.vars)
        c0 = inner.terms.get(zero, 0)
        coeffs = {e[0]: c for e, c in self.terms.items()}
        D = max(coeffs) if coeffs else 0
        if c0 and not self.is_polynomial:
            v0 = inner.valuation()
            target = inner.prec if requested_prec is None else requested_prec
            cap = self.cap if self.cap is not None else D
            if v0 <= 0 or not tail_rule_ok(v0, cap, target, self.ring.q):
                raise DivergentSubstitution(
                    f"tail of degree > {cap} not below precision {target}")
        acc = inner.constant(0)
        unit = inner.constant(1)
        for k in range(D, -1, -1):
            acc = acc * inner
            if k in coeffs:
                acc = acc + unit.scale(PadicElement(self.ring, coeffs[k], self.prec, self.den))
        return acc

    # rendering ------------------------------------------------------------
    def render(self, descending=None) -> str:
        if descending is None:
            descending = self.is_polynomial and len(self.vars) == 1
        p = self.ring.p
        M = p ** (self.prec + self.den)
        keys = sorted(self.terms, key=lambda e: (sum(e), tuple(-x for x in e)))
        if descending:
            keys.reverse()
        parts = []
        for e in keys:
            c = self.terms[e]
            coeff = _balanced_text(c, M, self.ring.m)
            if self.den:
                coeff = f"({coeff})/{p}^{self.den}" if coeff not in ("1", "-1") else f"{coeff}/{p}^{self.den}"
            mono = "*".join(
                v if x == 1 else f"{v}^{x}" for v, x in zip(self.vars, e) if x)
            if not mono:
                parts.append(coeff)
            elif coeff == "1":
                parts.append(mono)
            elif coeff == "-1":
                parts.append("-" + mono)
            else:
                parts.append(f"{coeff}*{mono}")
        if not parts:
            return "0"
        out = parts[0]
        for t in parts[1:]:
            out += " - " + t[1:] if t.startswith("-") else " + " + t
        return out

    def __repr__(self):
        return f"TruncSeries({self.render()} + O({self.ring.p}^{self.prec}))"


def _balanced_text(c, M, m):
    if m == 1:
        v = c % M
        if v > M // 2:
            v -= M
        return str(v)
    vals = []
    for a in c.c:
        a %= M
        if a > M // 2:
            a -= M
        vals.append(a)
    return "(" + ",".join(str(a) for a in vals) + ")"


def tail_rule_ok(v0, D, N, q):
    """For all k > D: k*v0 - ceil(log_q k) >= N."""
    k = D + 1
    # k*v0 - ceil(log_q k) is increasing once k*v0 grows faster than log;
    # scan a generous range to be safe.
    for kk in range(k, k + 64 * max(1, int(math.ceil(N / max(v0, 1e-9))) + 1)):
        if kk * v0 - math.ceil(math.log(kk, q) - 1e-12) < N:
            return False
        if kk * v0 > N + 4 * math.log(kk + 1, q) + 4:
            break
    return True


def min_degree_for_tail(v0, N, q, start=1):
    """Smallest D with the tail rule satisfied."""
    D = start
    while not tail_rule_ok(v0, D, N, q):
        D += 1
    return D


# ---------------------------------------------------------------------------
# functional wrappers
# ---------------------------------------------------------------------------

def series_arith(a: TruncSeries, b: TruncSeries, op: str) -> TruncSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op}")


def series_invert(a: TruncSeries) -> TruncSeries:
    return a.invert()


def compose(outer: TruncSeries, inner: TruncSeries, requested_prec=None) -> TruncSeries:
    return outer.compose(inner, requested_prec)


def derive(a: TruncSeries, var) -> TruncSeries:
    return a.derive(var)


def constant_term(a: TruncSeries, var) -> TruncSeries:
    return a.constant_term(var)


# ---------------------------------------------------------------------------
# dense univariate helpers: lists of raw numerators modulo M
# ---------------------------------------------------------------------------

def pmul(a, b, D, M):
    """Product truncated to degree <= D."""
    out = [0] * (D + 1)
    la, lb = min(len(a), D + 1), min(len(b), D + 1)
    for i in range(la):
        ai = a[i]
        if not ai:
            continue
        top = min(lb, D + 1 - i)
        for j in range(top):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return [c % M for c in out]


def padd(a, b, M):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return [(x + y) % M for x, y in zip(a, b)]


def pscale(a, c, M):
    return [(x * c) % M for x in a]


def pcompose(outer, inner, D, M):
    """outer(inner) mod (deg D+1, M); inner must have zero constant term."""
    if inner and inner[0] % M:
        raise ValueError("inner series has a nonzero constant term")
    top = min(len(outer) - 1, D)
    acc = [0] * (D + 1)
    for k in range(top, -1, -1):
        acc = pmul(acc, inner, D, M)
        acc[0] = (acc[0] + outer[k]) % M
    return acc


def pinv(a, D, M, inv0):
    """Inverse of a unit series given the inverse of its constant term."""
    out = [0] * (D + 1)
    out[0] = inv0 % M
    for k in range(1, D + 1):
        s = 0
        for j in range(1, min(k, len(a) - 1) + 1):
            s += a[j] * out[k - j]
        out[k] = (-s * inv0) % M
    return out


def pderiv(a, M):
    return [(i * a[i]) % M for i in range(1, len(a))] or [0]


def ppow_list(a, n, D, M):
    """[a^0, a^1, ..., a^n] truncated."""
    out = [[1] + [0] * D]
    for _ in range(n):
        out.append(pmul(out[-1], a, D, M))
    return out


# ---------------------------------------------------------------------------
# Kronecker-substitution products for plain-int coefficient lists
# ---------------------------------------------------------------------------

def _slot_bytes(M, n):
    bits = 2 * M.bit_length() + max(1, n).bit_length() + 1
    return (bits + 7) // 8


def kmul(a, b, M):
    """Full product of two int lists (entries in [0, M)), reduced mod M."""
    if not a or not b:
        return []
    sb = _slot_bytes(M, min(len(a), len(b)))
    A = int.from_bytes(b"".join(int(c).to_bytes(sb, "little") for c in a), "little")
    B = int.from_bytes(b"".join(int(c).to_bytes(sb, "little") for c in b), "little")
    n = len(a) + len(b) - 1
    raw = (A * B).to_bytes(n * sb + 1, "little")
    return [int.from_bytes(raw[i * sb:(i + 1) * sb], "little") % M for i in range(n)]


def pmul_fast(a, b, D, M):
    """Truncated product; Kronecker path for ints, schoolbook otherwise."""
    if a and isinstance(a[0], int) and b and isinstance(b[0], int):
        out = kmul(list(a[:D + 1]), list(b[:D + 1]), M)[:D + 1]
        return out + [0] * (D + 1 - len(out))
    return pmul(a, b, D, M)


def bmul(A, B, D, M):
    """Product of bivariate series stored as dicts {(i, j): c}, total degree <= D."""
    S = 2 * D + 1
    fa = [0] * ((D + 1) * S)
    fb = [0] * ((D + 1) * S)
    for (i, j), c in A.items():
        fa[i * S + j] = c % M
    for (i, j), c in B.items():
        fb[i * S + j] = c % M
    prod = kmul(fa, fb, M)
    out = {}
    for i in range(D + 1):
        base = i * S
        for j in range(D + 1 - i):
            idx = base + j
            if idx < len(prod) and prod[idx]:
                out[(i, j)] = prod[idx]
    return out
