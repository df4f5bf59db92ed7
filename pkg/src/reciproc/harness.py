"""Named verification suites and their configuration.

Every suite returns a list of records

    {suite, case, lhs, rhs, threshold, pass, runtime}

where ``pass`` means valuation(lhs - rhs) >= threshold or exact equality of
coordinates, as stated per suite.  Sampling uses ``random.Random`` (MT19937)
seeded from the configured seed and the suite name, so reports are
reproducible.
"""
from __future__ import annotations

import json
import random
import time
import zlib
from dataclasses import dataclass, field

from .errors import ConfigInvalid, ReciprocError
from .higher_field import HField, hf_formal_sum
from .lubin_tate import (eps_congruence_ok, frobenius_residual_ok, hom_iso_twisted,
                         preset_pack, preset_series, solve_frobenius_unit, twisted_residual_ok,
                         validate_lambda)
from .padic import INF, PadicRing
from .ql import q_galois_check, ql_descent_check
from .reciprocity import (GroupSpec, PairingCase, artin_hasse_gen_coordinate,
                          artin_hasse_t_coordinate, build_context, classical_artin_hasse,
                          iwasawa_coordinate, oracle_coordinate, pair_artin_hasse_gen,
                          pair_artin_hasse_t, pair_iwasawa, pair_oracle, pair_wiles,
                          parse_element, wiles_coordinate)
from .tower import Tower, norm_torsion_check, torsion_point, trace_torsion_check

PRESETS = (("mult", 3), ("special", 3), ("special", 5))


@dataclass
class SuiteConfig:
    suites: list = field(default_factory=list)
    seed: int = 0
    N: int | None = None
    D: int | None = None
    samples: int | None = None
    unit_exponent: int = 1
    out: str | None = None
    presets: list | None = None

    @classmethod
    def from_json(cls, data):
        if not isinstance(data, dict):
            raise ConfigInvalid("config must be a JSON object")
        known = {k: data[k] for k in ("suites", "seed", "N", "D", "samples", "unit_exponent", "out",
                                               "presets")
                 if k in data}
        extra = set(data) - set(known)
        if extra:
            raise ConfigInvalid(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**known)
        cfg.validate()
        return cfg

    def validate(self):
        if isinstance(self.suites, str):
            self.suites = [self.suites]
        for name in self.suites:
            if name not in SUITES:
                raise ConfigInvalid(f"unknown suite {name!r}")
        for key in ("N", "D", "samples"):
            v = getattr(self, key)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigInvalid(f"{key} must be a positive integer")
        if not isinstance(self.seed, int):
            raise ConfigInvalid("seed must be an integer")
        if not isinstance(self.unit_exponent, int) or self.unit_exponent < 1:
            raise ConfigInvalid("unit_exponent must be a positive integer")
        if self.presets is not None:
            self.presets = [_check_preset(GroupSpec.from_json(g)) for g in self.presets]
            if not self.presets:
                raise ConfigInvalid("presets must not be empty")


def _check_preset(spec):
    """Reject groups whose series is not in Lambda_pi (or not of degree q)."""
    try:
        ring = PadicRing(spec.p, 1, 4)
        f = preset_series(spec.preset, ring, coeffs=list(spec.coeffs) if spec.coeffs else None)
        report = validate_lambda(f, f.coefficient((1,)))
    except (ValueError, ReciprocError) as exc:
        raise ConfigInvalid(f"bad preset {spec.to_json()}: {exc}") from exc
    if not report["pi_lambda"]:
        raise ConfigInvalid(f"preset {spec.to_json()} is not a monic degree-q member of Lambda_pi")
    return spec


def _presets(cfg):
    if cfg.presets:
        return [(g.preset, g.p, g.coeffs) for g in cfg.presets]
    return [(name, p, None) for name, p in PRESETS]


def _preset_pack(name, p, coeffs, **kw):
    return preset_pack(name, p, coeffs=list(coeffs) if coeffs else None, **kw)


def _preset_case(name, p, coeffs, **kw):
    case = {"preset": name, "p": p}
    if coeffs:
        case["coeffs"] = list(coeffs)
    case.update(kw)
    return case


def _rng(cfg, name):
    return random.Random((cfg.seed << 32) ^ zlib.crc32(name.encode()))


def _record(suite, case, lhs, rhs, threshold, ok, start, **extra):
    rec = {"suite": suite, "case": case, "lhs": lhs, "rhs": rhs, "threshold": threshold,
           "pass": bool(ok), "runtime": round(time.perf_counter() - start, 4)}
    rec.update(extra)
    return rec


def _coord_value(c):
    return c.value if hasattr(c, "value") else c


def _try(fn):
    try:
        return fn(), None
    except ReciprocError as exc:
        return None, f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# formal groups and towers
# ---------------------------------------------------------------------------

def suite_group_axioms(cfg):
    out = []
    rng = _rng(cfg, "group-axioms")
    N = max(12, cfg.N or 12)
    D = max(30, cfg.D or 30)
    for name, p, coeffs in _presets(cfg):
        start = time.perf_counter()
        pack = _preset_pack(name, p, coeffs, N=N, D=max(D, p * p))
        res = dict(pack.check_axioms())
        for _ in range(2):
            a, b = rng.randrange(1, p ** 3), rng.randrange(1, p ** 3)
            for k, v in pack.check_endo_laws(a, b).items():
                res[f"endo_{k}_{a}_{b}"] = v
        out.append(_record("group-axioms", _preset_case(name, p, coeffs, N=N, D=pack.D),
                           res, "all true", "exact", all(res.values()), start))
    return out


def suite_multiplicative_closed_form(cfg):
    out = []
    N = cfg.N or 12
    for p in (3, 5):
        start = time.perf_counter()
        D = max(cfg.D or 0, p * p)
        pack = preset_pack("mult", p, N=N, D=D)
        expected = {(1, 0): 1, (0, 1): 1, (1, 1): 1}
        law = {e: c % pack.M for e, c in pack._F.items() if c % pack.M}
        law_ok = law == expected
        log = pack.log
        bad = []
        for k in range(1, D + 1):
            want = pack.ring.from_rational((-1) ** (k + 1), k)
            if not log.coefficient((k,)).equals_at(want, N):
                bad.append(k)
        out.append(_record("multiplicative-closed-form", {"p": p, "N": N, "D": D},
                           {"F": pack.F.render(), "log_mismatch_degrees": bad},
                           {"F": "X + Y + X*Y", "log_mismatch_degrees": []}, "exact",
                           law_ok and not bad, start))
    return out


def suite_tower_different(cfg):
    out = []
    N = cfg.N or 8
    for name, p, coeffs in _presets(cfg):
        tower = Tower(_preset_pack(name, p, coeffs, N=N), N)
        for s in (1, 2):
            start = time.perf_counter()
            ring = tower.level(s)
            got, want = ring.different_valuation(), ring.expected_different()
            out.append(_record("tower-different", _preset_case(name, p, coeffs, s=s),
                               got, want, "exact", got == want, start,
                               phi_degree=len(ring.phi) - 1))
    return out


def suite_norm_torsion(cfg):
    out = []
    N = max(10, cfg.N or 10)
    for name in ("special", "mult"):
        start = time.perf_counter()
        ring = Tower(preset_pack(name, 3, N=N), N).level(2)
        _, _, ok, prec = norm_torsion_check(ring, 1)
        out.append(_record("norm-torsion", {"preset": name, "p": 3, "level": 2, "k": 1, "N": N},
                           "prod F(X, v)", "f(X)", prec, ok, start))
    return out


def suite_trace_torsion(cfg):
    out = []
    N = max(10, cfg.N or 10)
    for name in ("special", "mult"):
        start = time.perf_counter()
        pack = preset_pack(name, 3, N=N)
        ring = Tower(pack, N).level(2)
        lhs, rhs, ok = trace_torsion_check(ring, 1, 1)
        out.append(_record("trace-torsion", {"preset": name, "p": 3, "n": 1, "m": 1, "N": N},
                           lhs.to_json(), rhs.to_json(), min(lhs.prec, rhs.prec), ok, start))
    start = time.perf_counter()
    pack = preset_pack("special", 3, N=N)
    g = preset_pack("custom", 3, N=N, coeffs=[0, 3, 3, 1])
    ring = Tower(pack, N).level(2)
    lhs, rhs, ok = trace_torsion_check(ring, 1, 1, pack_g=g)
    out.append(_record("trace-torsion", {"preset": "custom", "coeffs": [0, 3, 3, 1], "p": 3,
                                         "n": 1, "m": 1, "N": N},
                       lhs.to_json(), rhs.to_json(), min(lhs.prec, rhs.prec), ok, start))
    return out


def suite_w_relation(cfg):
    out = []
    N = cfg.N or 12
    for name, p, coeffs in _presets(cfg):
        start = time.perf_counter()
        pack = _preset_pack(name, p, coeffs, N=N, D=max(cfg.D or 0, p * p, 30))
        ok = pack.check_w_relation()
        out.append(_record("w-relation", _preset_case(name, p, coeffs, D=pack.D),
                           "l'(f(X)) f'(X)", "pi l'(X)", f"mod (p^{N}, X^{pack.D})", ok, start))
    return out


def suite_change_of_uniformizer(cfg):
    start = time.perf_counter()
    N = 8
    F = preset_pack("special", 3, N=N, D=20)
    G = preset_pack("special", 3, N=N, D=20, pi=F.ring(12))
    u = F.ring(4)
    fu = solve_frobenius_unit(u, N)
    res_ok = frobenius_residual_ok(fu, u, N)
    cong_ok = eps_congruence_ok(fu, u)
    out = [_record("change-of-uniformizer", {"u": 4, "N": N, "degree": fu.degree},
                   "sigma(eps) - eps*u", 0, f"mod 3^{N}", res_ok and cong_ok, start,
                   congruence=cong_ok)]
    start = time.perf_counter()
    hom = hom_iso_twisted(F, G, fu, D=20)
    ok = twisted_residual_ok(hom, N, 20)
    out.append(_record("change-of-uniformizer", {"f": "3X+X^3", "g": "12X+X^3", "D": 20},
                       "g(theta) - theta^Fr(f)", 0, f"mod (3^{N}, deg 20)", ok, start))
    return out


# ---------------------------------------------------------------------------
# derivations
# ---------------------------------------------------------------------------

def _fields(preset, p, d, N):
    tower = Tower(preset_pack(preset, p, N=N), N)
    low = HField(tower.level(1), d)
    return low, low.at_level(2)


def _names(F):
    out = {"e": F.gen()}
    for j in range(1, F.d):
        out[f"T{j}"] = F.T(j)
    return out


def _descent_symbols(rng, d, count):
    out = []
    while len(out) < count:
        k = rng.randrange(0, 3)
        c1, j1 = rng.randrange(1, 9), rng.randrange(1, 4)
        if d == 1:
            a = f"e^{k}*(1+{c1}*e^{j1})"
            if k == 0 and rng.random() < 0.5:
                a = f"1+{c1}*e^{j1}+e^{j1 + 1}"
            out.append((a, []))
        else:
            ta, tb = rng.randrange(0, 2), rng.randrange(-1, 2)
            a = f"e^{k}*T1^{ta}*(1+{c1}*e^{j1}*T1^{tb})"
            if rng.random() < 0.5:
                rest = f"T1^{rng.randrange(1, 3)}*(1+{rng.randrange(1, 9)}*e^{rng.randrange(1, 3)})"
            else:
                rest = f"e*(1+{rng.randrange(1, 9)}*e*T1)"
            out.append((a, [rest]))
    return out


def suite_ql_descent(cfg):
    out = []
    rng = _rng(cfg, "ql-descent")
    N = cfg.N or 10
    count = max(5, cfg.samples or 5)
    for d in (1, 2):
        for preset in ("special", "mult"):
            low, high = _fields(preset, 3, d, N)
            for a_text, rest_text in _descent_symbols(rng, d, count if preset == "special" else 2):
                start = time.perf_counter()
                a = parse_element(a_text, high, _names(high))
                rest = [parse_element(r, low, _names(low)) for r in rest_text]
                r = ql_descent_check(a, rest)
                out.append(_record("ql-descent", {"preset": preset, "p": 3, "d": d, "t": 2, "s": 1,
                                                  "a": a_text, "rest": rest_text},
                                   r["lhs"].to_json(), r["rhs"].to_json(), r["threshold"], r["ok"],
                                   start, diff_valuation=_v(r["diff_valuation"])))
    return out


def _v(v):
    return "inf" if v == INF else v


def suite_ql_galois(cfg):
    out = []
    N = cfg.N or 10
    for d, entries in ((1, ["e"]), (2, ["T1", "e"]), (2, ["T1+e", "1+e*T1^2"]), (1, ["e*(1+e)"])):
        low, _ = _fields("special", 3, d, N)
        names = _names(low)
        ents = [parse_element(t, low, names) for t in entries]
        for c in range(1, 3):
            start = time.perf_counter()
            r = q_galois_check(c, ents)
            out.append(_record("ql-galois", {"p": 3, "d": d, "c": c, "entries": entries},
                               r["lhs"].to_json(), r["rhs"].to_json(), r["threshold"], r["ok"],
                               start, diff_valuation=_v(r["diff_valuation"])))
    return out


# ---------------------------------------------------------------------------
# pairings
# ---------------------------------------------------------------------------

def _sample_units(rng, p, count, j):
    seen, out = set(), []
    while len(out) < count:
        u = 1 + rng.randrange(1, p ** 4) * p ** j
        if u % p and u not in seen:
            seen.add(u)
            out.append(u)
    return out


def suite_oracle_vs_iwasawa(cfg):
    out = []
    rng = _rng(cfg, "oracle-vs-iwasawa")
    units = _sample_units(rng, 3, max(8, cfg.samples or 8), cfg.unit_exponent)
    for preset in ("mult", "special"):
        spec = GroupSpec(preset, 3)
        for u in units:
            start = time.perf_counter()
            case = PairingCase(spec, 1, 1, [str(u)], "e")
            oracle = pair_oracle(case).coord.value
            closed = pair_oracle(case, "norm").coord.value
            iwa, err = _try(lambda: pair_iwasawa(case).coord.value)
            ctx = build_context(case)
            unchecked = iwasawa_coordinate([ctx.parse(str(u), 1)], ctx.parse_x(1),
                                           enforce_domain=False).value
            rhs = {"oracle": oracle, "oracle_norm": closed}
            ok = err is None and iwa == oracle and closed == oracle
            if preset == "mult":
                classical = classical_artin_hasse(u, 3, 1)
                rhs["classical"] = classical
                ok = ok and classical == oracle
            out.append(_record("oracle-vs-iwasawa", {"preset": preset, "p": 3, "n": 1, "d": 1,
                                                     "u": u, "x": "e_1"},
                               {"iwasawa": iwa, "error": err, "formula_outside_domain": unchecked},
                               rhs, "exact", ok, start))
    return out


def suite_oracle_vs_artin_hasse(cfg):
    out = []
    rng = _rng(cfg, "oracle-vs-artin-hasse")
    count = max(6, cfg.samples or 6)
    units = [str(u) for u in _sample_units(rng, 3, count - 3, 1)] + ["1+3*e", "1+3*e^2", "(1+3*e)*(1+e^11)"]
    for preset in ("special", "mult"):
        spec = GroupSpec(preset, 3)
        for u in units:
            start = time.perf_counter()
            ah = pair_artin_hasse_t(PairingCase(spec, 1, 1, [u], "e", formula="artin-hasse-t", t=3))
            oc = PairingCase(spec, 1, 1, [u], "e", formula="oracle", t=3)
            closed = pair_oracle(oc, "norm").coord
            ok = ah.coord == closed
            rhs = {"oracle_norm": closed.value}
            if u.isdigit():
                tors = pair_oracle(oc, "torsion").coord
                rhs["oracle"] = tors.value
                ok = ok and tors == closed
            out.append(_record("oracle-vs-artin-hasse", {"preset": preset, "p": 3, "t": 3, "k": 1,
                                                         "u": u},
                               ah.coord.value, rhs, "exact", ok, start))
    return out


_E1_AT_LEVEL2 = {"special": "(3*e+e^3)", "mult": "((1+e)^3-1)"}


def _domain_x(rng, d):
    c0 = rng.choice([1, 2, 4, 5, 7, 8])
    k = rng.randrange(2, 4)
    tail = f"+{rng.randrange(0, 9)}*e^{k + 1}"
    if d == 2 and rng.random() < 0.6:
        tail += f"+{rng.randrange(1, 9)}*e^{k}*T1^{rng.randrange(1, 3)}"
    return f"{c0}*e^{k}{tail}"


def suite_wiles_vs_iwasawa(cfg):
    out = []
    rng = _rng(cfg, "wiles-vs-iwasawa")
    count = max(10, cfg.samples or 10)
    for i in range(count):
        preset = ("special", "mult")[i % 2]
        d = 1 + (i // 2) % 2
        b = rng.randrange(0, 3)
        g = GroupSpec("custom", 3, (0, 3, 3 * b, 1))
        spec = GroupSpec(preset, 3)
        k = rng.randrange(1, 3)
        e1 = _E1_AT_LEVEL2[preset]
        if d == 1:
            high, low = rng.choice([([f"e^{k}"], [f"e^{k}"]), (["eg"], ["eg"]),
                                    ([f"eg*e^{k}"], [f"eg*e^{k}"])])
        else:
            c = rng.randrange(1, 9)
            high, low = rng.choice([
                (["T1", f"e^{k}"], ["T1", f"e^{k}"]),
                (["T1", "eg"], ["T1", "eg"]),
                ([f"T1*(1+{c}*{e1}*T1)", f"e^{k}"], [f"T1*(1+{c}*e*T1)", f"e^{k}"]),
                ([f"1+{c}*{e1}", "e"], [f"1+{c}*e", "e"]),
            ])
        x = _domain_x(rng, d)
        start = time.perf_counter()
        w = pair_wiles(PairingCase(spec, 1, d, high, x, formula="wiles", s=2, g=g)).coord
        iw = pair_iwasawa(PairingCase(spec, 1, d, low, x, g=g)).coord
        out.append(_record("wiles-vs-iwasawa", {"preset": preset, "p": 3, "n": 1, "s": 2, "d": d,
                                                "g": list(g.coeffs), "symbol_level2": high,
                                                "normed_symbol": low, "x": x},
                           w.value, iw.value, "exact", w == iw, start))
    return out


def suite_artin_hasse_gen_vs_iwasawa(cfg):
    out = []
    rng = _rng(cfg, "artin-hasse-gen-vs-iwasawa")
    count = max(10, cfg.samples or 10)
    for i in range(count):
        preset = ("mult", "special")[i % 2]
        d = 1 + (i // 2) % 2
        b = rng.randrange(0, 3)
        g = GroupSpec("custom", 3, (0, 3, 3 * b, 1))
        spec = GroupSpec(preset, 3)
        units = []
        if d == 2:
            c, j = rng.randrange(1, 9), rng.randrange(1, 3)
            units = [rng.choice(["T1", f"T1*(1+{c}*e^{j})", f"T1*(1+{c}*e^{j}*T1)"])]
        x = _domain_x(rng, d)
        start = time.perf_counter()
        ah = pair_artin_hasse_gen(PairingCase(spec, 1, d, units, x, formula="artin-hasse-gen", g=g)).coord
        iw = pair_iwasawa(PairingCase(spec, 1, d, units + ["eg"], x, g=g)).coord
        out.append(_record("artin-hasse-gen-vs-iwasawa", {"preset": preset, "p": 3, "n": 1, "d": d,
                                                          "g": list(g.coeffs), "units": units,
                                                          "x": x},
                           ah.value, iw.value, "exact", ah == iw, start))
    return out


def _formal_sum_text(ctx, x_text, y_text, level):
    x = ctx.parse(x_text, level)
    y = ctx.parse(y_text, level)
    return hf_formal_sum(x, y)


def suite_linearity(cfg):
    """Additivity in x and in the symbol for every evaluator."""
    out = []
    rng = _rng(cfg, "linearity")
    count = max(10, cfg.samples or 10)
    evaluators = ["iwasawa", "wiles", "artin-hasse-gen", "oracle", "artin-hasse-t"]
    for i in range(count):
        kind = evaluators[i % len(evaluators)]
        preset = ("special", "mult")[(i // len(evaluators)) % 2]
        spec = GroupSpec(preset, 3)
        g = GroupSpec("custom", 3, (0, 3, 3 * rng.randrange(0, 3), 1))
        start = time.perf_counter()
        if kind == "iwasawa":
            d = 2
            x, y = _domain_x(rng, d), _domain_x(rng, d)
            case = PairingCase(spec, 1, d, ["T1", "e"], x)
            ctx = build_context(case)
            sym = [ctx.parse(a, 1) for a in ("T1", "e")]
            sym2 = [ctx.parse(a, 1) for a in ("T1", "1+e*T1")]
            both = [sym[0], sym[1] * sym2[1]]
            vx = iwasawa_coordinate(sym, ctx.parse(x, 1))
            vy = iwasawa_coordinate(sym, ctx.parse(y, 1))
            vxy = iwasawa_coordinate(sym, _formal_sum_text(ctx, x, y, 1))
            s1 = iwasawa_coordinate(sym2, ctx.parse(x, 1))
            s12 = iwasawa_coordinate(both, ctx.parse(x, 1))
            lhs = {"x+y": vxy.value, "symbol product": s12.value}
            rhs = {"x+y": (vx + vy).value, "symbol product": (vx + s1).value}
        elif kind == "wiles":
            d = 1
            x, y = _domain_x(rng, d), "e"
            case = PairingCase(spec, 1, d, ["e"], x, formula="wiles", s=2)
            ctx = build_context(case)
            a1, a2 = ctx.parse("e", 2), ctx.parse("e^2", 2)
            vx = wiles_coordinate([a1], ctx.parse(x, 1))
            vy = wiles_coordinate([a1], ctx.parse(y, 1))
            vxy = wiles_coordinate([a1], _formal_sum_text(ctx, x, y, 1))
            s2 = wiles_coordinate([a2], ctx.parse(x, 1))
            s12 = wiles_coordinate([a1 * a2], ctx.parse(x, 1))
            lhs = {"x+y": vxy.value, "symbol product": s12.value}
            rhs = {"x+y": (vx + vy).value, "symbol product": (vx + s2).value}
        elif kind == "artin-hasse-gen":
            d = 2
            x, y = f"e^{rng.randrange(1, 3)}*(1+T1)", f"{rng.randrange(1, 9)}*e^2"
            case = PairingCase(spec, 1, d, ["T1"], x, formula="artin-hasse-gen", g=g)
            ctx = build_context(case)
            gp = ctx.g_pack
            u1, u2 = ctx.parse("T1", 1), ctx.parse("1+e*T1", 1)
            vx = artin_hasse_gen_coordinate([u1], ctx.parse(x, 1), gp)
            vy = artin_hasse_gen_coordinate([u1], ctx.parse(y, 1), gp)
            vxy = artin_hasse_gen_coordinate([u1], _formal_sum_text(ctx, x, y, 1), gp)
            # {u1 u2, e_g} = {u1, e_g} + {u2, e_g}
            s2 = artin_hasse_gen_coordinate([u2], ctx.parse(x, 1), gp)
            s12 = artin_hasse_gen_coordinate([u1 * u2], ctx.parse(x, 1), gp)
            lhs = {"x+y": vxy.value, "symbol product": s12.value}
            rhs = {"x+y": (vx + vy).value, "symbol product": (vx + s2).value}
        elif kind == "oracle":
            c1, c2 = rng.randrange(1, 3), rng.randrange(1, 3)
            a1, a2 = rng.choice([2, 4, 5, 7]), rng.choice([2, 4, 5, 7, 8])
            case = PairingCase(spec, 1, 1, [str(a1)], "e", formula="oracle")
            ctx = build_context(case)
            F = ctx.field(1)
            xp = F.scalar(torsion_point(F.ring, c1, 1))
            yp = F.scalar(torsion_point(F.ring, c2, 1))
            s1, s2 = [F.scalar(a1)], [F.scalar(a2)]
            vx = oracle_coordinate(s1, xp)
            vy = oracle_coordinate(s1, yp)
            vxy = _oracle_or_zero(s1, hf_formal_sum(xp, yp))
            v2 = oracle_coordinate(s2, xp)
            v12 = oracle_coordinate([F.scalar(a1 * a2)], xp)
            lhs = {"x+y": vxy.value, "symbol product": v12.value}
            rhs = {"x+y": (vx + vy).value, "symbol product": (vx + v2).value}
        else:
            u1, u2 = f"1+3*{rng.randrange(1, 9)}", f"1+3*e^{rng.randrange(1, 3)}"
            case = PairingCase(spec, 1, 1, [u1], "e", formula="artin-hasse-t", t=3)
            ctx = build_context(case)
            a, b = ctx.parse(u1, 3), ctx.parse(u2, 3)
            va, vb = artin_hasse_t_coordinate(a, 1), artin_hasse_t_coordinate(b, 1)
            vab = artin_hasse_t_coordinate(a * b, 1)
            lhs = {"symbol product": vab.value}
            rhs = {"symbol product": (va + vb).value}
        out.append(_record("linearity", {"evaluator": kind, "preset": preset, "p": 3, "n": 1},
                           lhs, rhs, "exact", lhs == rhs, start))
    return out


def _oracle_or_zero(symbol, x):
    if x.is_zero():
        R = x.field.ring
        from .tower import TorsionCoord
        return TorsionCoord(0, 1, R.p, R.base.m)
    return oracle_coordinate(symbol, x)


def suite_steinberg(cfg):
    out = []
    for b in (0, 1, 2):
        g = GroupSpec("custom", 3, (0, 3, 3 * b, 1))
        for preset in ("special", "mult"):
            for d, units in ((1, []), (2, ["T1"]), (2, ["1+e*T1"])):
                start = time.perf_counter()
                spec = GroupSpec(preset, 3)
                case = PairingCase(spec, 1, d, units, "eg", formula="artin-hasse-gen", g=g,
                                   theta=-1, log_group="g")
                r = pair_artin_hasse_gen(case)
                control = None
                for x in ("eg^2", "eg+eg^2", "2*eg^2+eg^3", "eg^2*(1+T1)" if d == 2 else "eg^3"):
                    c = pair_artin_hasse_gen(PairingCase(spec, 1, d, units, x, formula="artin-hasse-gen",
                                                         g=g, theta=-1, log_group="g")).coord
                    if c.value:
                        control = {"x": x, "coord": c.value}
                        break
                out.append(_record("steinberg", {"preset": preset, "g": list(g.coeffs), "d": d,
                                                 "symbol": units + ["-eg"], "x": "eg"},
                                   r.coord.value, 0, "exact", r.coord == 0, start,
                                   nonzero_control=control))
    return out


SUITES = {
    "group-axioms": suite_group_axioms,
    "multiplicative-closed-form": suite_multiplicative_closed_form,
    "tower-different": suite_tower_different,
    "norm-torsion": suite_norm_torsion,
    "trace-torsion": suite_trace_torsion,
    "w-relation": suite_w_relation,
    "ql-descent": suite_ql_descent,
    "ql-galois": suite_ql_galois,
    "oracle-vs-iwasawa": suite_oracle_vs_iwasawa,
    "oracle-vs-artin-hasse": suite_oracle_vs_artin_hasse,
    "wiles-vs-iwasawa": suite_wiles_vs_iwasawa,
    "artin-hasse-gen-vs-iwasawa": suite_artin_hasse_gen_vs_iwasawa,
    "change-of-uniformizer": suite_change_of_uniformizer,
    "linearity": suite_linearity,
    "steinberg": suite_steinberg,
}


def run_suite(config) -> list:
    """Run the configured suites; records come back in canonical order."""
    cfg = config if isinstance(config, SuiteConfig) else SuiteConfig.from_json(config)
    cfg.validate()
    names = cfg.suites or list(SUITES)
    records = []
    for name in names:
        records.extend(SUITES[name](cfg))
    return records


def write_jsonl(records, stream):
    for rec in records:
        stream.write(json.dumps(rec, sort_keys=True, default=str) + "\n")
