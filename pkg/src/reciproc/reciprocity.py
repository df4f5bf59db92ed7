"""Evaluators of the explicit pairing formulas and the class-field oracle.

Every evaluator returns a TorsionCoord c in C / pi^n naming [c]_f(e_{f,n}).
Two layers are exposed:

* ``*_coordinate`` functions work on already built HFElements;
* ``pair_*`` functions take a PairingCase (group data plus symbol and x
  given as expressions), build the fields at a working precision and retry
  at doubled precision when the result is not determined.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache

import sympy

from .errors import (ConfigInvalid, DescentLevelTooSmall, DomainViolation, NotAdmissiblePair,
                     NotATorsionPoint, OracleInapplicable, PrecisionExhausted)
from .higher_field import (HField, HFElement, det, gen_trace, hf_embed_up, hf_formal_diff,
                           hf_formal_log, hf_log_classical, hf_norm_trace_level, partial)
from .lubin_tate import FormalGroupPack, hom_iso_list, preset_pack
from .padic import INF, PadicElement
from .ql import ql
from .tower import (INF_PREC, TorsionCoord, Tower, TowerElement, galois_apply,
                    log_derivative_at, torsion_dlog, torsion_point, trace_norm)


# ---------------------------------------------------------------------------
# small helpers
# ---------------------------------------------------------------------------

def _coord(c: PadicElement, n: int, what: str) -> TorsionCoord:
    """Reduce an element of C known modulo p^prec to a coordinate mod pi^n."""
    R = c.ring
    if c.prec < n:
        raise PrecisionExhausted(f"{what}: value known only modulo p^{c.prec}, need p^{n}")
    v = c.valuation()
    if v != INF and v < 0:
        raise DomainViolation(f"{what}: value of valuation {v} is not integral")
    if v == INF:
        return TorsionCoord(0, n, R.p, R.m)
    num = c.num // R.p ** c.den if c.den else c.num
    return TorsionCoord(num % R.p ** n, n, R.p, R.m)


def _raw_unit_mod(x: PadicElement, k: int):
    R = x.ring
    if x.valuation() != 0:
        raise ValueError("expected a unit")
    num = x.num // R.p ** x.den if x.den else x.num
    return num % R.p ** k


def _apply_series(coeffs, x: HFElement, prec_digits: int) -> HFElement:
    """sum coeffs[k] x^k for x in the maximal ideal (raw integer coefficients)."""
    field = x.field
    R = field.ring
    v = x.valuation()
    if v == INF:
        return field.zero(prec=x.prec)
    target = min(x.prec, field.prec, R.m * prec_digits)
    D = min(len(coeffs) - 1, -(-target // v))
    acc = field.zero(prec=target)
    power = field.one()
    for k in range(1, D + 1):
        power = power * x
        if coeffs[k]:
            acc = acc + power * TowerElement(R, [coeffs[k]] + [R.base.raw(0)] * (R.m - 1),
                                             R.m * prec_digits)
    return acc.with_prec(target)


def hom_point(packF, packG, x: HFElement) -> HFElement:
    """[1]_{f,g}(x) for x in the maximal ideal."""
    R = x.field.ring
    v = x.valuation()
    if v == INF:
        return x
    target = min(x.prec, x.field.prec)
    D = max(-(-target // v) + 1, 2)
    coeffs = hom_iso_list(packF, packG, D)
    digits = packF.W - _log_q(D, packF.q) - 2
    return _apply_series(coeffs, x, digits)


def _log_q(D, q):
    return int(math.log(max(D, 2), q)) + 1


def _check_torsion_level(x: HFElement):
    """(level j, c0) with x = [c0]_f(e_{f,j}), c0 a unit."""
    if not x.is_scalar():
        raise OracleInapplicable("x depends on the T-variables")
    R = x.field.ring
    v = x.valuation()
    if v == INF:
        return 0, 0
    j = R.s
    w = v
    while w % R.q == 0 and j > 0:
        w //= R.q
        j -= 1
    if w != 1 or j < 1:
        raise OracleInapplicable("x is not a primitive torsion point")
    try:
        c0 = torsion_dlog(x.coefficient(), j)
    except NotATorsionPoint as exc:
        raise OracleInapplicable(str(exc)) from exc
    return j, c0


# ---------------------------------------------------------------------------
# element-level evaluators
# ---------------------------------------------------------------------------

def iwasawa_domain_ok(x: HFElement) -> bool:
    R = x.field.ring
    v = x.valuation()
    return v == INF or v * (R.q - 1) >= 2 * R.m


def iwasawa_coordinate(symbol, x: HFElement, log_pack=None,
                       enforce_domain: bool = True) -> TorsionCoord:
    """gen_trace(QL_n(alpha) l_f(x)) mod pi^n with the lifted QL_n.

    ``enforce_domain=False`` evaluates the expression outside the proven
    range; the result is then not a pairing value.
    """
    R = x.field.ring
    n = R.s
    v = x.valuation()
    if v == INF:
        return TorsionCoord(0, n, R.p, R.base.m)
    if enforce_domain and not iwasawa_domain_ok(x):
        raise DomainViolation(f"v_M(x) = {v} is below 2 v_M(p)/(q-1) = {2 * R.m / (R.q - 1)}")
    value = ql(list(symbol), lifted=True).value * hf_formal_log(x, log_pack)
    return _coord(gen_trace(value), n, "iwasawa")


def wiles_coordinate(symbol, x: HFElement, log_pack=None) -> TorsionCoord:
    """gen_trace(Tr_{s/n}(QL_s(alpha) l_f(x))) for alpha given at level s >= 2n."""
    low = x.field
    n = low.ring.s
    high = symbol[0].field
    s = high.ring.s
    if s < 2 * n:
        raise DescentLevelTooSmall(f"descent level {s} is below 2n = {2 * n}")
    R = low.ring
    if x.valuation() == INF:
        return TorsionCoord(0, n, R.p, R.base.m)
    lx = hf_embed_up(hf_formal_log(x, log_pack), s)
    value = hf_norm_trace_level(ql(list(symbol)).value * lx, n, "trace")
    return _coord(gen_trace(value), n, "wiles")


def artin_hasse_t_admissible(t: int, k: int) -> bool:
    return k >= 1 and t - k - 1 >= k


def artin_hasse_t_coordinate(u: HFElement, k: int) -> TorsionCoord:
    """({T_1..T_{d-1}, u}, e_t) at pairing level k: gen_trace(log u * (-1/pi^t))."""
    field = u.field
    R = field.ring
    t = R.s
    if not artin_hasse_t_admissible(t, k):
        raise NotAdmissiblePair(f"(k, t) = ({k}, {t}) admits no m with t-k-1 >= m >= k")
    scale = field.scalar(-(R.pi ** t).inverse())
    value = hf_log_classical(u) * scale
    return _coord(gen_trace(value), k, "artin-hasse-t")


def _root_of_unity_ok(theta, R) -> bool:
    th = R.base(theta) if not isinstance(theta, PadicElement) else theta
    return (th ** (R.q - 1) - R.base.one()).valuation() >= min(th.prec, R.pack.W)


def artin_hasse_gen_coordinate(units, x: HFElement, g_pack, theta=1, log_pack=None,
                               e_g: TowerElement | None = None) -> TorsionCoord:
    """Symbol {u_1..u_{d-1}, theta e_{g,n}} paired with x.

    det[d u_i / d T_j] / (u_1...u_{d-1}) * T_1...T_{d-1} / (xi^n l'_g(e_g) e_g) * l(x).
    The root of unity theta is prime-to-p torsion and contributes nothing.
    """
    field = x.field
    R = field.ring
    n = R.s
    d = field.d
    if len(units) != d - 1:
        raise ValueError(f"need {d - 1} units")
    if not _root_of_unity_ok(theta, R):
        raise DomainViolation("theta must be a (q-1)-th root of unity")
    if x.valuation() == INF:
        return TorsionCoord(0, n, R.p, R.base.m)
    if e_g is None:
        e_g = hom_point(R.pack, g_pack, field.gen()).coefficient()
    xi = R.from_base(g_pack.pi)
    lg = log_derivative_at(R, e_g, pack=g_pack)
    kernel = field.scalar((xi ** n * lg * e_g).inverse()).shift((1,) * field.nvars)
    if units:
        jac = [[partial(u, j) for j in range(1, d)] for u in units]
        prod = field.one()
        for u in units:
            prod = prod * u
        kernel = kernel * det(jac) * prod.inverse()
    value = kernel * hf_formal_log(x, log_pack)
    return _coord(gen_trace(value), n, "artin-hasse-gen")


def _oracle_symbol_entry(symbol):
    field = symbol[0].field
    for i, entry in enumerate(symbol[:-1]):
        if not (entry - field.T(i + 1)).is_zero():
            raise OracleInapplicable("oracle symbols have the shape {T_1, ..., T_{d-1}, a}")
    a = symbol[-1]
    if not a.is_scalar():
        raise OracleInapplicable("the last entry must lie in the constant field")
    return a.coefficient()


def oracle_coordinate(symbol, x: HFElement, k: int | None = None,
                      method: str = "torsion") -> TorsionCoord:
    """Class-field value of ({T_1..T_{d-1}, a}, x) at pairing level k.

    The reciprocity map sends the symbol to the Artin symbol of
    N_{K_L/K}(a) = pi^v w, which acts on torsion by [w^-1]_f.  With
    x = [c0](e_j) and z = [c0](e_{j+k}) the value is [w^-1](z) (-) z.
    """
    field = x.field
    R = field.ring
    k = R.s if k is None else k
    a = _oracle_symbol_entry(symbol)
    j, c0 = _check_torsion_level(x)
    if j == 0:
        return TorsionCoord(0, k, R.p, R.base.m)
    try:
        b = trace_norm(a, 0, "norm")
    except Exception as exc:  # pragma: no cover - propagated as inapplicable
        raise OracleInapplicable(f"norm not computable: {exc}") from exc
    v = b.valuation()
    if v == INF:
        raise OracleInapplicable("a is zero")
    pi = R.pack.pi
    w = b / pi ** v
    winv = R.base.one() / w
    delta = winv - R.base.one()
    if delta.valuation() != INF and delta.valuation() < j:
        raise OracleInapplicable("norm unit is not congruent to 1 modulo pi^j")
    c0raw = c0.raw(R.base)
    if method == "norm":
        return _coord((delta / pi ** j) * R.base(c0raw), k, "oracle")
    if method != "torsion":
        raise ValueError("method must be 'torsion' or 'norm'")
    top = R.tower.level(j + k)
    z = torsion_point(top, c0raw, j + k)
    y = galois_apply(_raw_unit_mod(winv, j + k), z)
    H = HField(top, 1)
    separation = top.q ** (top.s - 1) + 1
    diff = hf_formal_diff(H.scalar(y), H.scalar(z), _law_pack(R.pack, separation))
    if diff.prec < separation:
        raise PrecisionExhausted("difference of torsion points not separated")
    if diff.is_zero():
        return TorsionCoord(0, k, R.p, R.base.m)
    return torsion_dlog(diff.coefficient(), k)


_LAW_PACKS = {}


def _law_pack(pack, degree):
    """A pack for the same f whose group law reaches total degree ``degree``."""
    if pack.D >= degree:
        return pack
    key = (id(pack), degree)
    hit = _LAW_PACKS.get(key)
    if hit is None:
        hit = FormalGroupPack(pack.f, pack.pi, degree, N=pack.N, name=pack.name)
        _LAW_PACKS[key] = hit
    return hit


def classical_artin_hasse(u: int, p: int, n: int) -> int:
    """Tr_{Q_p(zeta_{p^n})/Q_p}(-log u) / p^n mod p^n for u in Z_p^*.

    log is the Iwasawa logarithm, log u = log(u^(p-1)) / (p-1).
    """
    if u % p == 0:
        raise ValueError("u must be a p-adic unit")
    target = 2 * n + 4
    z = Fraction(pow(u, p - 1) - 1)
    acc = Fraction(0)
    k = 1
    power = Fraction(1)
    while True:
        power *= z
        term = power / k
        if _fval(term, p) >= target and k > 4 * target:
            break
        acc += term if k % 2 else -term
        k += 1
    m_n = (p - 1) * p ** (n - 1)
    value = -m_n * acc / (p - 1) / p ** n
    if _fval(value, p) < 0:
        raise ArithmeticError("classical value is not integral")
    M = p ** n
    return value.numerator * pow(value.denominator, -1, M) % M


def _fval(x: Fraction, p: int) -> int:
    if x == 0:
        return 10 ** 9
    v = 0
    a, b = x.numerator, x.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


# ---------------------------------------------------------------------------
# cases
# ---------------------------------------------------------------------------

FORMULAS = ("iwasawa", "wiles", "artin-hasse-t", "artin-hasse-gen", "oracle")


@dataclass(frozen=True)
class GroupSpec:
    preset: str
    p: int
    coeffs: tuple | None = None
    pi: int | None = None

    def to_json(self):
        out = {"preset": self.preset, "p": self.p}
        if self.coeffs is not None:
            out["coeffs"] = list(self.coeffs)
        if self.pi is not None:
            out["pi"] = self.pi
        return out

    @classmethod
    def from_json(cls, data):
        if isinstance(data, GroupSpec):
            return data
        try:
            coeffs = data.get("coeffs")
            return cls(data["preset"], int(data["p"]),
                       tuple(int(c) for c in coeffs) if coeffs is not None else None,
                       data.get("pi"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(f"bad group spec {data!r}: {exc}") from exc


@lru_cache(maxsize=64)
def build_pack(spec: GroupSpec, N: int, D: int | None = None):
    q = spec.p
    D = max(q * q, N + 2) if D is None else D
    return preset_pack(spec.preset, spec.p, N=N, D=D, pi=spec.pi,
                       coeffs=list(spec.coeffs) if spec.coeffs else None)


@lru_cache(maxsize=64)
def build_tower(spec: GroupSpec, N: int):
    return Tower(build_pack(spec, N), N)


@dataclass
class PairingCase:
    """A pairing problem.

    ``symbol`` and ``x`` are expressions in T1..T{d-1}, e (the uniformizer of
    the level they live at), eg (the image of e in the g-group) and pi.  The
    symbol lives at level ``s`` for the Wiles formula and at level ``t`` for
    the Artin-Hasse formula in t; otherwise at level n.
    """
    group: GroupSpec
    n: int
    d: int
    symbol: list
    x: str
    formula: str = "iwasawa"
    s: int | None = None
    t: int | None = None
    g: GroupSpec | None = None
    theta: int = 1
    log_group: str = "f"
    oracle_method: str = "torsion"
    N: int | None = None
    label: str = ""

    def __post_init__(self):
        if self.formula not in FORMULAS:
            raise ConfigInvalid(f"unknown formula {self.formula!r}")
        if self.n < 1 or self.d < 1:
            raise ConfigInvalid("n and d must be positive")
        self.group = GroupSpec.from_json(self.group)
        if self.g is not None:
            self.g = GroupSpec.from_json(self.g)
        self.symbol = [str(a) for a in self.symbol]
        self.x = str(self.x)
        if self.formula == "artin-hasse-t" and len(self.symbol) != 1:
            raise ConfigInvalid("the Artin-Hasse formula in t takes the unit u only")
        elif self.formula == "artin-hasse-gen" and len(self.symbol) != self.d - 1:
            raise ConfigInvalid("the generalized Artin-Hasse formula takes d-1 units")
        elif self.formula not in ("artin-hasse-t", "artin-hasse-gen") and len(self.symbol) != self.d:
            raise ConfigInvalid(f"symbol needs {self.d} entries")

    @property
    def symbol_level(self):
        if self.formula == "wiles":
            return self.s if self.s is not None else 2 * self.n
        if self.formula == "artin-hasse-t":
            if self.t is None:
                raise ConfigInvalid("the Artin-Hasse formula in t needs t")
            return self.t
        if self.formula == "oracle" and self.t is not None:
            return self.t
        return self.n

    def default_precision(self):
        return self.n + self.symbol_level + 6

    def to_json(self):
        out = {"group": self.group.to_json(), "n": self.n, "d": self.d,
               "symbol": self.symbol, "x": self.x, "formula": self.formula}
        for key in ("s", "t", "N"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        if self.g is not None:
            out["g"] = self.g.to_json()
        if self.theta != 1:
            out["theta"] = self.theta
        if self.log_group != "f":
            out["log_group"] = self.log_group
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, data):
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigInvalid(f"bad pairing case: {exc}") from exc


@dataclass
class PairingResult:
    coord: TorsionCoord
    n: int
    formula: str
    precision_used: int
    domain_checks: dict = dc_field(default_factory=dict)

    def to_json(self):
        return {"coord": self.coord.to_json()["coord"], "n": self.n, "formula": self.formula,
                "precision_used": self.precision_used, "domain_checks": self.domain_checks}


class CaseContext:
    """Fields and name bindings of one case at one working precision."""

    def __init__(self, case: PairingCase, N: int, group: GroupSpec | None = None,
                 e_binding=None):
        self.case = case
        self.N = N
        spec = case.group if group is None else group
        self.pack = build_pack(spec, N)
        self.tower = build_tower(spec, N)
        self.g_pack = build_pack(case.g, N) if case.g is not None else None
        self.base_field = HField(self.tower.level(case.n), case.d)
        self._e_binding = e_binding
        self.x_map = None

    def field(self, level):
        return self.base_field.at_level(level)

    def names(self, level):
        F = self.field(level)
        e = F.gen() if self._e_binding is None else self._e_binding(F)
        out = {"e": e, "pi": F.scalar(self.pack.pi)}
        for j in range(1, F.d):
            out[f"T{j}"] = F.T(j)
        if self.g_pack is not None:
            out["eg"] = hom_point(self.pack, self.g_pack, e)
        return out

    def parse(self, text, level):
        return parse_element(text, self.field(level), self.names(level))

    def parse_x(self, level):
        x = self.parse(self.case.x, level)
        return x if self.x_map is None else self.x_map(x)


def parse_element(text: str, field: HField, names: dict) -> HFElement:
    """Evaluate an arithmetic expression in the given names inside ``field``."""
    symbols = {k: sympy.Symbol(k) for k in names}
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals=symbols, evaluate=False)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigInvalid(f"cannot parse {text!r}") from exc
    base = field.ring.base

    def conv(node):
        if node.is_Symbol:
            if node.name not in names:
                raise ConfigInvalid(f"unknown name {node.name!r} in {text!r}")
            return names[node.name]
        if node.is_Integer:
            return field.scalar(int(node))
        if node.is_Rational:
            return field.scalar(base.from_rational(int(node.p), int(node.q)))
        if node.is_Add:
            acc = None
            for arg in node.args:
                term = conv(arg)
                acc = term if acc is None else acc + term
            return acc
        if node.is_Mul:
            acc = None
            for arg in node.args:
                term = conv(arg)
                acc = term if acc is None else acc * term
            return acc
        if node.is_Pow:
            if not node.exp.is_Integer:
                raise ConfigInvalid(f"non-integer exponent in {text!r}")
            return conv(node.base) ** int(node.exp)
        raise ConfigInvalid(f"unsupported expression {node} in {text!r}")

    return conv(expr)


def _evaluate_in(ctx: CaseContext, formula: str):
    case = ctx.case
    n = case.n
    log_pack = ctx.g_pack if case.log_group == "g" else None
    checks = {}
    if formula == "iwasawa":
        x = ctx.parse_x(n)
        checks["valuation_bound"] = iwasawa_domain_ok(x)
        symbol = [ctx.parse(a, n) for a in case.symbol]
        return iwasawa_coordinate(symbol, x, log_pack), checks
    if formula == "wiles":
        s = case.symbol_level
        checks["descent_level"] = s >= 2 * n
        symbol = [ctx.parse(a, s) for a in case.symbol]
        x = ctx.parse_x(n)
        return wiles_coordinate(symbol, x, log_pack), checks
    if formula == "artin-hasse-t":
        t = case.symbol_level
        checks["admissible"] = artin_hasse_t_admissible(t, n)
        u = ctx.parse(case.symbol[0], t)
        return artin_hasse_t_coordinate(u, n), checks
    if formula == "artin-hasse-gen":
        if ctx.g_pack is None:
            raise ConfigInvalid("the generalized Artin-Hasse formula needs a g-group")
        units = [ctx.parse(a, n) for a in case.symbol]
        x = ctx.parse_x(n)
        e_g = ctx.names(n)["eg"].coefficient()
        return artin_hasse_gen_coordinate(units, x, ctx.g_pack, case.theta, log_pack, e_g), checks
    if formula == "oracle":
        level = case.symbol_level
        symbol = [ctx.parse(a, level) for a in case.symbol]
        x = ctx.parse_x(level)
        return oracle_coordinate(symbol, x, n, case.oracle_method), checks
    raise ConfigInvalid(f"unknown formula {formula!r}")


def _precision_schedule(case: PairingCase):
    import os
    override = os.environ.get("RECIPROC_PRECISION_OVERRIDE")
    if override:
        try:
            return [int(override)]
        except ValueError as exc:
            raise ConfigInvalid("RECIPROC_PRECISION_OVERRIDE must be an integer") from exc
    N0 = case.N if case.N is not None else case.default_precision()
    return [N0, 2 * N0, 4 * N0]


def evaluate(case: PairingCase, formula: str | None = None, make_context=None) -> PairingResult:
    """Evaluate a case, retrying at doubled precision at most twice."""
    formula = case.formula if formula is None else formula
    last = None
    for N in _precision_schedule(case):
        ctx = CaseContext(case, N) if make_context is None else make_context(case, N)
        try:
            coord, checks = _evaluate_in(ctx, formula)
        except PrecisionExhausted as exc:
            last = exc
            continue
        return PairingResult(coord, case.n, formula, N, checks)
    raise PrecisionExhausted(f"no working precision settled the value: {last}")


def pair_iwasawa(case: PairingCase) -> PairingResult:
    return evaluate(case, "iwasawa")


def pair_wiles(case: PairingCase, s: int | None = None) -> PairingResult:
    if s is not None:
        case = _replace(case, s=s)
    return evaluate(case, "wiles")


def pair_artin_hasse_t(case: PairingCase) -> PairingResult:
    return evaluate(case, "artin-hasse-t")


def pair_artin_hasse_gen(case: PairingCase) -> PairingResult:
    return evaluate(case, "artin-hasse-gen")


def pair_oracle(case: PairingCase, method: str | None = None) -> PairingResult:
    if method is not None:
        case = _replace(case, oracle_method=method)
    return evaluate(case, "oracle")


def _replace(case, **kw):
    data = dict(case.__dict__)
    data.update(kw)
    return PairingCase(**data)


def pair_conjugate_check(case: PairingCase, g: GroupSpec) -> dict:
    """Evaluate the case in the f-group and the transported case in the g-group.

    In the g-group the uniformizer name e is bound to [1]_{g,f}(e_{g,level}),
    the image of e_{f,level} under the identification of the two towers, and
    x is replaced by [1]_{f,g}(x).  Coordinates in the g-group refer to
    e_{g,n} = [1]_{f,g}(e_{f,n}), so the two results must coincide.
    """
    if case.formula in ("artin-hasse-gen",) or case.g is not None:
        raise ConfigInvalid("conjugation is checked for formulas without a second group")
    g = GroupSpec.from_json(g)
    direct = evaluate(case)

    def g_context(c, N):
        packF = build_pack(c.group, N)
        packG = build_pack(g, N)
        ctx = CaseContext(c, N, group=g, e_binding=lambda F: hom_point(packG, packF, F.gen()))
        ctx.x_map = lambda x: hom_point(packF, packG, x)
        return ctx

    transported = evaluate(case, make_context=g_context)
    return {"f": direct.coord, "g": transported.coord,
            "ok": direct.coord == transported.coord,
            "precision_used": max(direct.precision_used, transported.precision_used)}


def build_context(case: PairingCase, N: int | None = None) -> CaseContext:
    """Fields and parsed names of a case, for element-level work."""
    return CaseContext(case, case.default_precision() if N is None else N)
