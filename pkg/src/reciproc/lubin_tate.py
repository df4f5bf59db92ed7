"""Lubin–Tate formal groups: group law, logarithm, exponential, endomorphisms
and isomorphisms, all as truncated power series over Z_q.

Working precision
-----------------
Every pack computes modulo ``p^W`` with ``W`` larger than the requested
precision ``N``.  The reserve covers three separate losses:

* the coefficient solvers divide by ``pi^k - pi`` (valuation 1); a
  perturbation at degree ``j`` only reaches degree ``q*j`` undivided by pi
  because ``f' = 0 mod pi``, so at most ``floor(log_q D) + 1`` digits are lost;
* the logarithm has denominators of valuation at most ``floor(log_p D)``;
* the exponential is computed in the rescaled variable ``X -> pi*X`` where
  it is integral, and unscaling costs ``D - 1`` digits.
"""
from __future__ import annotations

import math
import threading

from .errors import (ConstructionMismatch, InsufficientPrecision,
                     PrecisionExhausted, UniformizerMismatch)
from .padic import INF, PadicElement, PadicRing, raw_val, raw_divisible
from .series import TruncSeries, bmul, kmul, pcompose, pinv, pmul_fast

PRESETS = ("mult", "special")


def _ilog(x, base):
    """floor(log_base x) for x >= 1."""
    k = 0
    while base ** (k + 1) <= x:
        k += 1
    return k


def working_precision(N, D, p, q):
    return N + D + 2 * _ilog(max(D, 1), p) + 4


# ---------------------------------------------------------------------------
# membership in Lambda_pi
# ---------------------------------------------------------------------------

class LambdaReport(dict):
    """Result of :func:`validate_lambda`; truthy iff both conditions hold."""

    def __bool__(self):
        return bool(self.get("member"))


def validate_lambda(f: TruncSeries, pi: PadicElement) -> LambdaReport:
    ring = f.ring
    if f.prec < 2 or pi.prec < 2:
        raise InsufficientPrecision("need coefficient precision >= 2")
    q = ring.q
    linear = f.coefficient((1,))
    const = f.coefficient((0,))
    cond_linear = const.is_zero(min(f.prec, pi.prec)) and \
        (linear - pi).is_zero(min(f.prec, pi.prec))
    cond_mod_pi = True
    top = max((e[0] for e in f.terms), default=0)
    for k in range(0, max(top, q) + 1):
        c = f.coefficient((k,))
        target = 1 if k == q else 0
        if f.den or raw_val((c.num - target), ring.p) < 1:
            cond_mod_pi = False
            break
    is_pilambda = (cond_linear and cond_mod_pi and f.is_polynomial and top == q
                   and f.coefficient((q,)).equals_at(ring.one(), f.prec))
    return LambdaReport(member=cond_linear and cond_mod_pi, linear_ok=cond_linear,
                        mod_pi_ok=cond_mod_pi, pi_lambda=is_pilambda)


def preset_series(name, ring: PadicRing, pi=None, coeffs=None) -> TruncSeries:
    p, q = ring.p, ring.q
    if name == "mult":
        if ring.m != 1:
            raise ValueError("the multiplicative preset needs q = p")
        from math import comb
        c = [0] + [comb(p, k) for k in range(1, p + 1)]
        return TruncSeries.from_coeffs(ring, "X", c, is_polynomial=True)
    if name == "special":
        pi = pi if pi is not None else ring(p)
        c = [ring(0), pi] + [ring(0)] * (q - 2) + [ring(1)]
        return TruncSeries.from_coeffs(ring, "X", c, is_polynomial=True)
    if name == "custom":
        return TruncSeries.from_coeffs(ring, "X", coeffs, is_polynomial=True)
    raise ValueError(f"unknown preset {name}")


# ---------------------------------------------------------------------------
# coefficient solver for g(t(X)) = t(f(X))
# ---------------------------------------------------------------------------

def _div_by_uniformizer_like(x, d, ring, W):
    """x / d for d of valuation exactly 1 (raw values modulo p^W)."""
    p = ring.p
    if not raw_divisible(x % p, p) and raw_val(x % p ** W, p) < 1:
        raise PrecisionExhausted("numerator not divisible by the uniformizer")
    unit = (d // p) % p ** W
    return ((x // p) * ring.raw_inv_unit(unit, W)) % p ** W


def _fpowers(f, D, M):
    """Dense powers f^j for j = 0..D truncated at degree D."""
    out = [[1] + [0] * D]
    for _ in range(D):
        out.append(pmul_fast(out[-1], f, D, M))
    return out


def intertwine(g, xi, f, pi, t1, D, ring, W, fpow=None):
    """Coefficients of t with g(t) = t(f), t = t1*X + ..., untwisted.

    ``g``, ``f`` are dense raw lists; ``xi``, ``pi`` raw uniformizers.
    """
    M = ring.p ** W
    fpow = fpow if fpow is not None else _fpowers(f, D, M)
    t = [0, t1 % M] + [0] * (D - 1)
    gdeg = max(i for i, c in enumerate(g) if c % M) if any(c % M for c in g) else 1
    # P[i][d] = degree-d coefficient of t^i
    P = {1: t}
    for i in range(2, min(gdeg, D) + 1):
        P[i] = [0] * (D + 1)
    pik = pi % M
    for k in range(2, D + 1):
        pik = (pik * pi) % M
        for i in range(2, min(gdeg, k) + 1):
            prev = P[i - 1]
            s = 0
            for j in range(1, k - i + 2):
                if t[j]:
                    s += t[j] * prev[k - j]
            P[i][k] = s % M
        rhs = 0
        for j in range(1, k):
            if t[j]:
                c = fpow[j][k]
                if c:
                    rhs += t[j] * c
        lhs = 0
        for i in range(2, min(gdeg, k) + 1):
            if g[i] % M:
                lhs += g[i] * P[i][k]
        num = (rhs - lhs) % M
        t[k] = _div_by_uniformizer_like(num, (xi - pik) % M, ring, W)
    return t


# ---------------------------------------------------------------------------
# the pack
# ---------------------------------------------------------------------------

class FormalGroupPack:
    """Lubin–Tate datum attached to ``f`` in Lambda_pi, truncated at degree D."""

    def __init__(self, f: TruncSeries, pi: PadicElement, D: int, N: int | None = None,
                 name: str = "custom"):
        base = f.ring
        p, q = base.p, base.q
        if D < q * q:
            raise ValueError(f"degree cap D={D} must be at least q^2={q * q}")
        self.N = base.N if N is None else N
        self.D = D
        self.name = name
        self.W = working_precision(self.N, D, p, q)
        self.ring = PadicRing(p, base.m, self.W)
        ring = self.ring
        self.p, self.q = p, q
        M = p ** self.W
        self.M = M
        self.pi_raw = ring.raw(pi.num) % M
        if raw_val(self.pi_raw, p) != 1 or pi.den:
            raise ValueError("pi must be a uniformizer of K")
        self.pi = PadicElement(ring, self.pi_raw, self.W)
        fc = [0] * (D + 1)
        for e, c in f.terms.items():
            if e[0] <= D:
                fc[e[0]] = ring.raw(c) % M
        self.f_list = fc
        self.f_is_polynomial = f.is_polynomial
        report = validate_lambda(
            TruncSeries(ring, ("X",), {(i,): c for i, c in enumerate(fc)},
                        is_polynomial=f.is_polynomial, prec=min(f.prec + 0, self.W)),
            self.pi)
        if not report:
            raise ValueError(f"f is not in Lambda_pi: {dict(report)}")
        self.pi_lambda = report["pi_lambda"]
        self.solver_loss = _ilog(D, q) + 1
        self._lock = threading.Lock()
        self._endo_cache = {}
        self._ext_cache = {}
        self._fpow = _fpowers(fc, D, M)
        self._build_group_law()
        self._build_log()
        self._build_exp()

    # series wrappers ------------------------------------------------------
    def _series(self, coeffs, prec, den=0, var="X"):
        return TruncSeries(self.ring, (var,), {(i,): c for i, c in enumerate(coeffs)},
                           cap=self.D, policy="truncate", den=den, prec=prec)

    @property
    def f(self):
        s = self._series(self.f_list, self.W)
        s.is_polynomial = self.f_is_polynomial
        return s

    # group law ------------------------------------------------------------
    def _build_group_law(self):
        D, M, ring, p = self.D, self.M, self.ring, self.p
        f, fpow, pi = self.f_list, self._fpow, self.pi_raw
        fdeg = max(i for i, c in enumerate(f) if c)
        Fh = {1: [1, 1]}  # homogeneous parts: Fh[d][i] = coeff of X^i Y^(d-i)
        # H[i][d] = degree-d homogeneous part of F^i
        H = {1: Fh}
        for i in range(2, fdeg + 1):
            H[i] = {}

        def hmul(a, b):
            out = [0] * (len(a) + len(b) - 1)
            for x, ca in enumerate(a):
                if ca:
                    for y, cb in enumerate(b):
                        if cb:
                            out[x + y] += ca * cb
            return out

        pik = pi
        for k in range(2, D + 1):
            pik = (pik * pi) % M
            for i in range(2, min(fdeg, k) + 1):
                acc = [0] * (k + 1)
                for j in range(1, k - i + 2):
                    prod = hmul(Fh[j], H[i - 1][k - j])
                    for x, c in enumerate(prod):
                        acc[x] += c
                H[i][k] = [c % M for c in acc]
            A = [0] * (k + 1)
            for i in range(2, min(fdeg, k) + 1):
                if f[i]:
                    for x, c in enumerate(H[i][k]):
                        A[x] += f[i] * c
            B = [0] * (k + 1)
            for a in range(0, k):
                for b in range(0, k - a):
                    if a + b == 0:
                        continue
                    c = Fh[a + b][a] if a + b in Fh else 0
                    if not c:
                        continue
                    fa, fb = fpow[a], fpow[b]
                    for x in range(a, k - b + 1):
                        u = fa[x]
                        if u:
                            v = fb[k - x]
                            if v:
                                B[x] += c * u * v
            d = (pi - pik) % M
            Fh[k] = [_div_by_uniformizer_like((B[x] - A[x]) % M, d, ring, self.W)
                     for x in range(k + 1)]
        self._F = {(i, d - i): c for d, part in Fh.items() for i, c in enumerate(part) if c}
        self.F_prec = self.W - self.solver_loss

    @property
    def F(self) -> TruncSeries:
        return TruncSeries(self.ring, ("X", "Y"), dict(self._F), cap=self.D,
                           policy="truncate", prec=self.F_prec)

    # logarithm ------------------------------------------------------------
    def _log_by_limit(self, D, target):
        """pi^-m f^(m) with m grown until two successive iterates agree."""
        p, q, ring = self.p, self.q, self.ring
        m = 1
        while q ** m <= D:
            m += 1
        loss = _ilog(max(D, 1), p) + 2
        prev = None
        while True:
            work = target + m + loss + 2
            Mw = p ** work
            fl = [c % Mw for c in self.f_list] + [0] * max(0, D + 1 - len(self.f_list))
            fl = self._f_list_at(work, D)
            g = [0, 1] + [0] * (D - 1)
            for _ in range(m):
                g = pcompose(fl, g, D, Mw)
            den = 0
            for k in range(1, D + 1):
                v = raw_val(g[k], p)
                if v != INF:
                    den = max(den, m - v)
            den = max(den, 0)
            winv = ring.raw_inv_unit((self.pi_raw // p) % Mw, work)
            scale = ring.raw_pow(winv, m, Mw)
            nums = [0] * (D + 1)
            for k in range(1, D + 1):
                nums[k] = ((g[k] * scale) % Mw) * p ** den // p ** m if m > den else \
                    (g[k] * scale * p ** (den - m)) % Mw
            cur = (nums, den)
            if prev is not None and _same(prev, cur, target, p):
                return cur
            prev = cur
            m += 1
            if m > 400:
                raise ConstructionMismatch("limit construction of the logarithm did not settle")

    def _f_list_at(self, work, D):
        """f's coefficients as raw values mod p^work (exact for polynomial f)."""
        Mw = self.p ** work
        out = [0] * (D + 1)
        for i, c in enumerate(self.f_list[:D + 1]):
            out[i] = c % Mw
        return out

    def _build_log(self):
        D, p, M = self.D, self.p, self.M
        # primitive of 1 / dF/dY(X, 0)
        fy = [self._F.get((k, 1), 0) for k in range(D + 1)]
        lp = pinv(fy, D, M, 1)
        den = _ilog(D, p)
        nums = [0] * (D + 1)
        for k in range(1, D + 1):
            vk = raw_val(k, p)
            uk = k // p ** vk
            nums[k] = (lp[k - 1] * p ** (den - vk) * self.ring.raw_inv_unit(self.ring.raw(uk), self.W)) % M
        prim_prec = self.F_prec - den
        self._log_primitive = (nums, den, prim_prec)
        lim_nums, lim_den = self._log_by_limit(D, self.W)
        lim_prec = self.W
        check = min(prim_prec, lim_prec)
        if not _same((nums, den), (lim_nums, lim_den), check, p):
            raise ConstructionMismatch("the two logarithm constructions disagree")
        self._log_limit = (lim_nums, lim_den, lim_prec)
        self.log_prec = check
        self._log = (lim_nums, lim_den)

    @property
    def log(self) -> TruncSeries:
        nums, den = self._log
        return self._series(nums, self.log_prec, den)

    @property
    def log_primitive(self) -> TruncSeries:
        nums, den, prec = self._log_primitive
        return self._series(nums, prec, den)

    @property
    def log_limit(self) -> TruncSeries:
        nums, den, prec = self._log_limit
        return self._series(nums, prec, den)

    # exponential ----------------------------------------------------------
    def scaled_log(self, D=None):
        """L(X) = l(pi X)/pi, an integral series."""
        D = self.D if D is None else D
        nums, den = self._log if D == self.D else self.log_extended(D)
        p, M = self.p, self.M
        out = [0] * (D + 1)
        pw = 1
        for k in range(1, D + 1):
            # l_k pi^(k-1) = nums[k] pi^(k-1) / p^den
            val = (nums[k] * pw)
            if den:
                val = val % (M * p ** den)
                if not raw_divisible(val, p ** den):
                    raise PrecisionExhausted("scaled logarithm not integral")
                val = val // p ** den
            out[k] = val % M
            pw = (pw * self.pi_raw) % (M * p ** den)
        return out

    def _build_exp(self):
        D, M = self.D, self.M
        L = self.scaled_log()
        E = [0, 1] + [0] * (D - 1)
        P = {1: E}
        for i in range(2, D + 1):
            P[i] = [0] * (D + 1)
        for k in range(2, D + 1):
            for i in range(2, k + 1):
                prev = P[i - 1]
                s = 0
                for j in range(1, k - i + 2):
                    if E[j]:
                        s += E[j] * prev[k - j]
                P[i][k] = s % M
            acc = 0
            for i in range(2, k + 1):
                if L[i]:
                    acc += L[i] * P[i][k]
            E[k] = (-acc) % M
        self._exp_scaled = E
        self._log_scaled = L
        # unscale: exp_k = E_k / pi^(k-1)
        p = self.p
        den = D - 1
        winv = self.ring.raw_inv_unit((self.pi_raw // p) % M, self.W)
        nums = [0] * (D + 1)
        wpow = 1
        for k in range(1, D + 1):
            nums[k] = (E[k] * wpow * p ** (den - (k - 1))) % (M * p ** den)
            wpow = (wpow * winv) % M
        self._exp = (nums, den)
        self.exp_prec = self.W - den

    @property
    def exp(self) -> TruncSeries:
        nums, den = self._exp
        return self._series(nums, self.exp_prec, den)

    @property
    def exp_scaled(self) -> TruncSeries:
        return self._series(self._exp_scaled, self.W)

    @property
    def log_scaled(self) -> TruncSeries:
        return self._series(self._log_scaled, self.log_prec)

    # endomorphisms --------------------------------------------------------
    def endo_list(self, a, D=None):
        """Dense coefficients of [a]_f to degree D (raw, mod p^W)."""
        D = self.D if D is None else D
        araw = self.ring.raw(a.num if isinstance(a, PadicElement) else a) % self.M
        key = (araw if self.ring.m == 1 else araw.c, D)
        with self._lock:
            hit = self._endo_cache.get(key)
        if hit is not None:
            return hit
        fpow = self._fpow if D == self.D else self._fpowers_ext(D)
        t = intertwine(self._f_list_at(self.W, D), self.pi_raw, self._f_list_at(self.W, D),
                       self.pi_raw, araw, D, self.ring, self.W, fpow)
        with self._lock:
            self._endo_cache[key] = t
        return t

    def endo(self, a) -> TruncSeries:
        return self._series(self.endo_list(a), self.W - self.solver_loss)

    def _fpowers_ext(self, D):
        key = ("fpow", D)
        with self._lock:
            hit = self._ext_cache.get(key)
        if hit is None:
            hit = _fpowers(self._f_list_at(self.W, D), D, self.M)
            with self._lock:
                self._ext_cache[key] = hit
        return hit

    # longer univariate series on demand -----------------------------------
    def log_derivative_list(self, D):
        """l'(X) to degree D as the convergent product of (f'/pi)(f^(j)(X))."""
        key = ("lprime", D)
        with self._lock:
            hit = self._ext_cache.get(key)
        if hit is not None:
            return hit
        p, M, ring = self.p, self.M, self.ring
        fl = self._f_list_at(self.W, D)
        winv = ring.raw_inv_unit((self.pi_raw // p) % M, self.W)
        fprime = [(i * fl[i]) % M for i in range(1, D + 1)] + [0]
        h = [((c // p) * winv) % M for c in fprime]  # f'/pi, integral
        acc = [1] + [0] * D
        g = [0, 1] + [0] * (D - 1)
        stable = 0
        for _ in range(10 * (self.W + D)):
            factor = pcompose(h, g, D, M)
            new = pmul_fast(acc, factor, D, M)
            stable = stable + 1 if new == acc else 0
            acc = new
            if stable >= 2:
                break
            g = pcompose(fl, g, D, M)
        with self._lock:
            self._ext_cache[key] = acc
        return acc

    def log_extended(self, D):
        """(numerators, den) of l_f to degree D, integrating the product form of l'."""
        if D <= self.D:
            nums, den = self._log
            return nums[:D + 1], den
        key = ("log", D)
        with self._lock:
            hit = self._ext_cache.get(key)
        if hit is not None:
            return hit
        p, M = self.p, self.M
        lp = self.log_derivative_list(D)
        den = _ilog(D, p)
        nums = [0] * (D + 1)
        for k in range(1, D + 1):
            vk = raw_val(k, p)
            uk = k // p ** vk
            nums[k] = (lp[k - 1] * p ** (den - vk) * self.ring.raw_inv_unit(self.ring.raw(uk), self.W)) % (M * p ** den)
        out = (nums, den)
        with self._lock:
            self._ext_cache[key] = out
        return out

    # axioms ---------------------------------------------------------------
    def check_axioms(self, prec=None):
        """Exact checks of the group-law identities at precision ``prec``."""
        t = self.N if prec is None else prec
        p, D = self.p, self.D
        Mt = p ** t
        F = {e: c % Mt for e, c in self._F.items() if c % Mt}
        res = {}
        res["unit"] = all(((c - (1 if e == (1, 0) else 0)) % Mt == 0)
                          for e, c in F.items() if e[1] == 0) and F.get((1, 0), 0) == 1
        res["commutative"] = all(F.get((j, i), 0) == c for (i, j), c in F.items())
        res["associative"] = _assoc_check(F, D, Mt)
        # log(F(X,Y)) = log X + log Y, done in the rescaled variable where all is integral
        L = [c % Mt for c in self._log_scaled]
        Fs = _scale_bivariate(self._F, self.pi_raw, p, D, self.M, Mt)
        acc = {}
        for k in range(D, 0, -1):
            acc = bmul(acc, Fs, D, Mt) if acc else {}
            if L[k]:
                acc[(0, 0)] = (acc.get((0, 0), 0) + L[k]) % Mt
        acc = bmul(acc, Fs, D, Mt)
        rhs = {}
        for k in range(1, D + 1):
            if L[k]:
                rhs[(k, 0)] = (rhs.get((k, 0), 0) + L[k]) % Mt
                rhs[(0, k)] = (rhs.get((0, k), 0) + L[k]) % Mt
        res["log_additive"] = _dict_eq(acc, rhs)
        E = [c % Mt for c in self._exp_scaled]
        comp = pcompose(E, L, D, Mt)
        res["exp_log"] = comp == [0, 1] + [0] * (D - 1)
        comp2 = pcompose(L, E, D, Mt)
        res["log_exp"] = comp2 == [0, 1] + [0] * (D - 1)
        return res

    def check_endo_laws(self, a, b, prec=None):
        t = self.N if prec is None else prec
        D, Mt = self.D, self.p ** t
        ea = [c % Mt for c in self.endo_list(a)]
        eb = [c % Mt for c in self.endo_list(b)]
        araw = self.ring.raw(a.num if isinstance(a, PadicElement) else a)
        braw = self.ring.raw(b.num if isinstance(b, PadicElement) else b)
        esum = [c % Mt for c in self.endo_list(araw + braw)]
        eprod = [c % Mt for c in self.endo_list(araw * braw)]
        Fsub = evaluate_bivariate_series(self._F, ea, eb, D, Mt)
        res = {"sum": Fsub == esum, "product": pcompose(ea, eb, D, Mt) == eprod}
        # log([a](X)) = a log(X), rescaled: L([a]_scaled) = a L
        L = [c % Mt for c in self._log_scaled]
        ea_s = _scale_univariate(self.endo_list(a), self.pi_raw, self.p, D, self.M, Mt)
        lhs = pcompose(L, ea_s, D, Mt)
        rhs = [(araw * c) % Mt for c in L]
        res["log_linear"] = lhs == rhs
        return res

    def check_w_relation(self, prec=None, D=None):
        """l'(f(X)) f'(X) = pi l'(X) mod deg D."""
        t = self.N if prec is None else prec
        D = self.D if D is None else D
        Mt = self.p ** t
        # use the primitive-route l' = 1/dF/dY(X,0), independent of the product form
        fy = [self._F.get((k, 1), 0) for k in range(D + 1)]
        lp = [c % Mt for c in pinv(fy, D, self.M, 1)]
        fl = [c % Mt for c in self.f_list[:D + 1]]
        fprime = [(i * fl[i]) % Mt for i in range(1, D + 1)] + [0]
        lhs = pmul_fast(pcompose(lp, fl, D, Mt), fprime, D, Mt)
        rhs = [(self.pi_raw * c) % Mt for c in lp]
        # the X^D coefficient of l' needs F in total degree D + 1, so compare mod X^D
        return lhs[:D] == rhs[:D]

    def __repr__(self):
        return f"FormalGroupPack({self.name}, p={self.p}, q={self.q}, D={self.D}, N={self.N})"


def _same(a, b, t, p):
    """Equality of (nums, den) series modulo p^t (absolute)."""
    na, da = a
    nb, db = b
    den = max(da, db)
    M = p ** (t + den)
    n = max(len(na), len(nb))
    for k in range(n):
        x = na[k] * p ** (den - da) if k < len(na) else 0
        y = nb[k] * p ** (den - db) if k < len(nb) else 0
        if (x - y) % M:
            return False
    return True


def _dict_eq(a, b):
    keys = set(a) | set(b)
    return all(a.get(k, 0) == b.get(k, 0) for k in keys)


def _scale_bivariate(F, pi, p, D, M, Mt):
    """pi^-1 F(pi X, pi Y): coefficient of degree d gets pi^(d-1)."""
    out = {}
    for (i, j), c in F.items():
        out[(i, j)] = (c * pow(pi, i + j - 1, Mt)) % Mt
    return out


def _scale_univariate(a, pi, p, D, M, Mt):
    return [0] + [(a[k] * pow(pi, k - 1, Mt)) % Mt for k in range(1, D + 1)]


def evaluate_bivariate_series(F, x, y, D, M):
    """F(x(X), y(X)) for univariate x, y with zero constant term."""
    xp = [[1] + [0] * D]
    yp = [[1] + [0] * D]
    for _ in range(D):
        xp.append(pmul_fast(xp[-1], x, D, M))
        yp.append(pmul_fast(yp[-1], y, D, M))
    out = [0] * (D + 1)
    by_i = {}
    for (i, j), c in F.items():
        by_i.setdefault(i, {})[j] = c
    for i, row in by_i.items():
        inner = [0] * (D + 1)
        for j, c in row.items():
            for k, v in enumerate(yp[j]):
                if v:
                    inner[k] += c * v
        inner = [v % M for v in inner]
        prod = pmul_fast(xp[i], inner, D, M)
        out = [(u + v) % M for u, v in zip(out, prod)]
    return out


def _assoc_check(F, D, M):
    """F(F(X,Y),Z) = F(X,F(Y,Z)) as trivariate series of total degree <= D."""
    by_i = {}
    for (i, j), c in F.items():
        by_i.setdefault(i, {})[j] = c
    powers = [{(0, 0): 1}]
    for _ in range(D):
        powers.append(bmul(powers[-1], F, D, M))
    lhs = {}
    for (i, j), c in F.items():
        for (a, b), v in powers[i].items():
            if a + b + j <= D:
                key = (a, b, j)
                lhs[key] = (lhs.get(key, 0) + c * v) % M
    rhs = {}
    for (i, j), c in F.items():
        for (b, cc), v in powers[j].items():
            if i + b + cc <= D:
                key = (i, b, cc)
                rhs[key] = (rhs.get(key, 0) + c * v) % M
    lhs = {k: v for k, v in lhs.items() if v}
    rhs = {k: v for k, v in rhs.items() if v}
    return lhs == rhs


def build_group(f: TruncSeries, D: int, pi: PadicElement | None = None,
                N: int | None = None, name="custom") -> FormalGroupPack:
    ring = f.ring
    pi = pi if pi is not None else f.coefficient((1,))
    return FormalGroupPack(f, pi, D, N=N, name=name)


def preset_pack(name, p, N=12, D=None, pi=None, m=1, coeffs=None) -> FormalGroupPack:
    """Pack for a named preset; ``coeffs`` (ascending) are used when name is 'custom'."""
    ring = PadicRing(p, m, N)
    q = ring.q
    D = q * q if D is None else D
    if name == "custom":
        if not coeffs:
            raise ValueError("the custom preset needs coefficients")
        coeffs = [c if isinstance(c, PadicElement) else ring(c) for c in coeffs]
        pi = coeffs[1] if pi is None else pi
    pi_el = ring(p) if pi is None else (pi if isinstance(pi, PadicElement) else ring(pi))
    f = preset_series(name, ring, pi_el, coeffs=coeffs)
    return FormalGroupPack(f, pi_el, D, N=N, name=name)


def endo(pack: FormalGroupPack, a) -> TruncSeries:
    return pack.endo(a)


# ---------------------------------------------------------------------------
# isomorphisms
# ---------------------------------------------------------------------------

class HomSeries:
    def __init__(self, source, target, coeffs, leading, twisted=False, eps_ring=None,
                 prec=None, coeff_ring=None):
        self.source = source
        self.target = target
        self.coeffs = coeffs
        self.leading = leading
        self.twisted = twisted
        self.eps_ring = eps_ring
        self.prec = prec
        self.coeff_ring = coeff_ring

    @property
    def series(self) -> TruncSeries:
        if self.twisted:
            raise TypeError("twisted series has coefficients outside Z_q; use .coeffs")
        return self.source._series(self.coeffs, self.prec)


def hom_iso(packF: FormalGroupPack, packG: FormalGroupPack) -> HomSeries:
    if packF.ring != packG.ring or packF.pi_raw != packG.pi_raw:
        raise UniformizerMismatch("both groups must share the ring and the uniformizer")
    D = min(packF.D, packG.D)
    t = intertwine(packG._f_list_at(packF.W, D), packG.pi_raw,
                   packF._f_list_at(packF.W, D), packF.pi_raw, 1, D, packF.ring, packF.W,
                   packF._fpow if D == packF.D else None)
    return HomSeries(packF, packG, t, packF.ring.one(), prec=packF.W - packF.solver_loss)


def hom_iso_list(packF, packG, D):
    """Coefficients of [1]_{f,g} to an arbitrary degree D."""
    if packF.ring != packG.ring or packF.pi_raw != packG.pi_raw:
        raise UniformizerMismatch("both groups must share the ring and the uniformizer")
    return intertwine(packG._f_list_at(packF.W, D), packG.pi_raw,
                      packF._f_list_at(packF.W, D), packF.pi_raw, 1, D, packF.ring, packF.W,
                      packF._fpowers_ext(D) if D != packF.D else packF._fpow)


def check_intertwining(hom: HomSeries, prec=None):
    """g(t(X)) == t(f(X)) mod (p^prec, deg D) for untwisted hom."""
    F, G = hom.source, hom.target
    t = F.N if prec is None else prec
    D = min(F.D, G.D, len(hom.coeffs) - 1)
    Mt = F.p ** t
    tl = [c % Mt for c in hom.coeffs[:D + 1]]
    g = [c % Mt for c in G.f_list[:D + 1]]
    f = [c % Mt for c in F.f_list[:D + 1]]
    return pcompose(g, tl, D, Mt) == pcompose(tl, f, D, Mt)


# ---------------------------------------------------------------------------
# Frobenius twist over an unramified extension
# ---------------------------------------------------------------------------

class UnramifiedModel:
    """Z/p^W[x]/(x^ell - 1) with ord_ell(p) = degree.

    The factor Z_p[x]/(Phi_ell) is a product of copies of the unramified ring
    of the given degree, and x -> x^p acts on it as the arithmetic Frobenius.
    The extra factor at x = 1 is projected away by ``self.idempotent``.
    Only the base q = p is supported.
    """

    def __init__(self, p, degree, W):
        import flint
        import sympy
        self.p, self.degree, self.W = p, degree, W
        self.M = p ** W
        k = 1
        while True:
            ell = k * degree + 1
            if sympy.isprime(ell) and ell != p and sympy.n_order(p, ell) == degree:
                break
            k += 1
        self.ell = ell
        self.ctx = flint.fmpz_mod_poly_ctx(self.M)
        self.modulus = self.ctx([-1] + [0] * (ell - 1) + [1])
        self._perm = [(p * i) % ell for i in range(ell)]
        inv_ell = pow(ell, -1, self.M)
        self.idempotent = self.ctx([(1 - inv_ell) % self.M] + [(-inv_ell) % self.M] * (ell - 1))

    def element(self, coeffs):
        return self.ctx([c % self.M for c in coeffs])

    def scalar(self, c):
        return self.ctx([c % self.M])

    def zero(self):
        return self.ctx([0])

    def mul(self, a, b):
        return a.mul_mod(b, self.modulus)

    def sigma(self, a):
        src = [int(c) for c in a.coeffs()]
        out = [0] * self.ell
        perm = self._perm
        for i, c in enumerate(src):
            if c:
                out[perm[i]] = c
        return self.ctx(out)

    def project(self, a):
        """Coefficient vector of the image in Z/p^W[x]/(Phi_ell)."""
        c = [int(v) for v in a.coeffs()] + [0] * self.ell
        c = c[:self.ell]
        top = c[-1]
        return [(v - top) % self.M for v in c[:-1]]

    def is_zero_mod(self, a, e):
        pe = self.p ** e
        return all(v % pe == 0 for v in self.project(a))

    def divide_by_p(self, a):
        vals = [int(v) for v in a.coeffs()]
        if any(v % self.p for v in vals):
            return None
        return self.ctx([v // self.p for v in vals])


class FrobeniusUnit(tuple):
    """(eps, degree, tau) with model attached as ``.model``."""

    def __new__(cls, eps, degree, tau, model):
        obj = super().__new__(cls, (eps, degree, tau))
        obj.model = model
        return obj

    eps = property(lambda s: s[0])
    degree = property(lambda s: s[1])
    tau = property(lambda s: s[2])


def _unit_order(u, p, N):
    M, k, x = p ** N, 1, u % p ** N
    while x != 1:
        x = (x * u) % M
        k += 1
    return k


def solve_frobenius_unit(u: PadicElement, N: int) -> FrobeniusUnit:
    """eps with sigma(eps) = eps*u mod p^N and eps = 1 mod (u - 1).

    The degree is the order of u modulo p^N, which is the least degree in
    which the norm condition u^degree = 1 holds.  On each Frobenius orbit
    i, p*i, p^2*i, ... of exponents the coefficients are forced to be
    c, c/u, c/u^2, ...; taking c = -1 on every orbit makes eps congruent to 1.
    """
    from .errors import NotPrincipalUnit
    ring = u.ring
    if ring.m != 1:
        raise NotImplementedError("Frobenius twist only implemented over Q_p")
    p = ring.p
    if u.den or u.valuation() != 0 or (u.num - 1) % p:
        raise NotPrincipalUnit("u must be a principal unit")
    uu = u.num % p ** N
    degree = _unit_order(uu, p, N)
    model = UnramifiedModel(p, degree, N)
    if degree == 1:
        return FrobeniusUnit(model.idempotent, 1, 1, model)
    M, ell = model.M, model.ell
    uinv = pow(uu, -1, M)
    coeffs = [0] * ell
    seen = [False] * ell
    seen[0] = True
    for start in range(1, ell):
        if seen[start]:
            continue
        i, c = start, M - 1
        while not seen[i]:
            seen[i] = True
            coeffs[i] = c
            c = (c * uinv) % M
            i = (i * p) % ell
    eps = model.mul(model.element(coeffs), model.idempotent)
    return FrobeniusUnit(eps, degree, 1, model)


def frobenius_residual_ok(fu: FrobeniusUnit, u: PadicElement, N: int) -> bool:
    m = fu.model
    res = m.sigma(fu.eps) - m.mul(fu.eps, m.scalar(u.num))
    return m.is_zero_mod(res, N)


def eps_congruence_ok(fu: FrobeniusUnit, u: PadicElement) -> bool:
    """eps = 1 mod (u - 1) in the unramified factor."""
    m = fu.model
    v = raw_val((u.num - 1) % m.M, m.p)
    v = min(v, m.W)
    return m.is_zero_mod(fu.eps - m.scalar(1), v)


def hom_iso_twisted(packF: FormalGroupPack, packG: FormalGroupPack, fu: FrobeniusUnit,
                    D=None) -> HomSeries:
    """theta = eps*X + ... with g(theta) = theta^sigma(f) coefficientwise.

    At degree k the unknown enters as xi*theta_k - pi^k*sigma(theta_k); the
    sigma part is contracting for k >= 2, so a fixed-point iteration of
    theta_k = (R_k + pi^k sigma(theta_k)) / xi converges digit by digit.
    """
    from .errors import TwistSolveFailure
    model = fu.model
    p, M = model.p, model.M
    if packF.ring.m != 1 or packG.ring.m != 1:
        raise NotImplementedError("Frobenius twist only implemented over Q_p")
    D = min(packF.D, packG.D) if D is None else D
    g = [c % M for c in packG._f_list_at(packF.W, D)]
    f = [c % M for c in packF._f_list_at(packF.W, D)]
    pi, xi = packF.pi_raw % M, packG.pi_raw % M
    if raw_val(xi, p) != 1:
        raise TwistSolveFailure("target uniformizer must have valuation 1")
    xi_unit_inv = pow((xi // p) % M, -1, M)
    fpow = _fpowers(f, D, M)
    gdeg = max((i for i, c in enumerate(g) if c), default=1)
    theta = [model.zero(), fu.eps] + [model.zero()] * (D - 1)
    sig = [model.zero(), model.sigma(fu.eps)] + [model.zero()] * (D - 1)
    P = {i: [model.zero()] * (D + 1) for i in range(2, min(gdeg, D) + 1)}
    P[1] = theta
    pik = pi
    for k in range(2, D + 1):
        pik = (pik * pi) % M
        for i in range(2, min(gdeg, k) + 1):
            acc = model.zero()
            for j in range(1, k - i + 2):
                acc += model.mul(theta[j], P[i - 1][k - j])
            P[i][k] = acc
        R = model.zero()
        for j in range(1, k):
            c = fpow[j][k]
            if c:
                R += sig[j] * c
        for i in range(2, min(gdeg, k) + 1):
            if g[i]:
                R -= P[i][k] * g[i]
        cur = model.zero()
        for _ in range(model.W + 2):
            S = R + model.sigma(cur) * pik
            half = model.divide_by_p(S)
            if half is None:
                raise TwistSolveFailure(f"no solution at degree {k}")
            new = half * xi_unit_inv
            if new == cur:
                break
            cur = new
        else:
            raise TwistSolveFailure(f"iteration did not settle at degree {k}")
        theta[k] = cur
        sig[k] = model.sigma(cur)
    return HomSeries(packF, packG, theta, fu.eps, twisted=True, eps_ring=fu.degree,
                     prec=model.W, coeff_ring=model)


def twisted_residual_ok(hom: HomSeries, prec=None, D=None) -> bool:
    """g(theta) - theta^sigma(f) = 0 mod (p^prec, deg D), recomputed by plain composition."""
    model = hom.coeff_ring
    M = model.M
    D = len(hom.coeffs) - 1 if D is None else D
    prec = model.W if prec is None else prec
    theta = hom.coeffs[:D + 1]
    g = [c % M for c in hom.target._f_list_at(hom.source.W, D)]
    f = [c % M for c in hom.source._f_list_at(hom.source.W, D)]

    def smul(a, b):
        out = [model.zero() for _ in range(D + 1)]
        for i in range(1, D + 1):
            for j in range(1, D + 1 - i):
                out[i + j] += model.mul(a[i], b[j])
        return out

    lhs = [model.zero() for _ in range(D + 1)]
    power = list(theta)
    for i in range(1, D + 1):
        if i > 1:
            if not any(g[i:]):
                break
            power = smul(power, theta)
        if g[i]:
            for d in range(D + 1):
                lhs[d] += power[d] * g[i]
    rhs = [model.zero() for _ in range(D + 1)]
    fp = [1] + [0] * D
    for j in range(1, D + 1):
        fp = pmul_fast(fp, f, D, M)
        sj = model.sigma(theta[j])
        for d in range(j, D + 1):
            if fp[d]:
                rhs[d] += sj * fp[d]
    return all(model.is_zero_mod(lhs[d] - rhs[d], prec) for d in range(D + 1))
