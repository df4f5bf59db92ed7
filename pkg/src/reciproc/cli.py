"""Command line front end: reciproc group|torsion|ql|pair|verify."""
from __future__ import annotations

import json
import os
import sys

import click

from .errors import ConfigInvalid, ReciprocError
from .harness import SUITES, SuiteConfig, run_suite, write_jsonl
from .higher_field import HField, HFElement
from .lubin_tate import preset_pack
from .padic import INF
from .ql import ql
from .reciprocity import GroupSpec, PairingCase, evaluate, parse_element
from .tower import INF_PREC, Tower, TowerElement, torsion_points

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _balanced(v, M):
    v %= M
    return v - M if v > M // 2 else v


def render_polynomial(coeffs, var="X"):
    """Descending, integer coefficients in balanced form: [3, 0, 1] -> 'X^2 + 3'."""
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = int(coeffs[k])
        if not c:
            continue
        mono = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
        if not mono:
            text = str(c)
        elif c == 1:
            text = mono
        elif c == -1:
            text = "-" + mono
        else:
            text = f"{c}*{mono}"
        parts.append(text)
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


def render_tower(a: TowerElement, var="e"):
    R = a.ring
    digits = -(-min(a.prec, R.P) // R.m) + a.den if a.prec < INF_PREC else R.N + a.den
    M = R.p ** max(digits, 1)
    coeffs = [_balanced(c if isinstance(c, int) else c.c[0], M) for c in a.c]
    body = render_polynomial(coeffs, var)
    return f"({body})/{R.p}^{a.den}" if a.den and body != "0" else body


def render_hf(a: HFElement):
    parts = []
    for e in sorted(a.terms):
        coeff = render_tower(a.terms[e])
        mono = "*".join(f"T{j + 1}" if k == 1 else f"T{j + 1}^{k}" for j, k in enumerate(e) if k)
        parts.append(f"({coeff})*{mono}" if mono else f"({coeff})")
    body = " + ".join(parts) if parts else "0"
    return f"{body} + O(e^{a.prec})" if a.prec < INF_PREC else body


def render(entity) -> str:
    """Canonical text for a group pack, tower ring, torsion table, QL value or pairing result."""
    from .lubin_tate import FormalGroupPack
    from .tower import TowerRing
    if isinstance(entity, FormalGroupPack):
        law = entity.F
        return law.with_prec(min(law.prec, entity.N)).render()
    if isinstance(entity, TowerRing):
        return render_polynomial([_balanced(c, entity.Mc) for c in entity.phi])
    if isinstance(entity, HFElement):
        return render_hf(entity)
    if isinstance(entity, TowerElement):
        return render_tower(entity)
    if isinstance(entity, list):
        return "\n".join(f"{coord.value} | {render_tower(pt)}" for coord, pt in entity)
    if hasattr(entity, "to_json"):
        return json.dumps(entity.to_json(), sort_keys=True)
    return str(entity)


# ---------------------------------------------------------------------------
# shared options
# ---------------------------------------------------------------------------

def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a JSON object")
    return data


def _precision(value, default):
    override = os.environ.get("RECIPROC_PRECISION_OVERRIDE")
    if override:
        try:
            return int(override)
        except ValueError as exc:
            raise ConfigInvalid("RECIPROC_PRECISION_OVERRIDE must be an integer") from exc
    return value if value is not None else default


def _coeff_list(text):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return tuple(int(c) for c in text)
    try:
        return tuple(int(c) for c in str(text).split(","))
    except ValueError as exc:
        raise ConfigInvalid(f"bad coefficient list {text!r}") from exc


def _group_spec(cfg, preset, p, coeffs):
    preset = cfg.get("preset", preset)
    p = int(cfg.get("p", p))
    coeffs = _coeff_list(cfg.get("coeffs", coeffs))
    if preset not in ("mult", "special", "custom"):
        raise ConfigInvalid(f"unknown preset {preset!r}")
    if preset == "custom" and not coeffs:
        raise ConfigInvalid("the custom preset needs --coeffs")
    return GroupSpec(preset, p, coeffs)


def _pack(spec, N, D):
    try:
        return preset_pack(spec.preset, spec.p, N=N, D=D,
                           coeffs=list(spec.coeffs) if spec.coeffs else None)
    except ValueError as exc:
        raise ConfigInvalid(str(exc)) from exc


class _Output:
    def __init__(self, path):
        self.path = path
        self.stream = open(path, "w") if path else sys.stdout

    def write(self, rec):
        write_jsonl([rec], self.stream)

    def close(self):
        if self.path:
            self.stream.close()


def _run(body):
    """Map library errors to exit codes."""
    try:
        code = body()
    except ConfigInvalid as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except ReciprocError as exc:
        click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        sys.exit(EXIT_FAIL)
    sys.exit(code)


def common(fn):
    fn = click.option("--config", "config_path", type=click.Path(), default=None,
                      help="JSON config file")(fn)
    fn = click.option("--seed", type=int, default=None, help="RNG seed")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="JSONL output file")(fn)
    return fn


def group_options(fn):
    fn = click.option("--preset", default="special", help="mult, special or custom")(fn)
    fn = click.option("--p", "p", type=int, default=3)(fn)
    fn = click.option("--coeffs", default=None, help="comma separated coefficients of f")(fn)
    fn = click.option("--N", "N", type=int, default=None, help="precision in p-digits")(fn)
    fn = click.option("--D", "D", type=int, default=None, help="degree cap")(fn)
    return fn


@click.group()
def main():
    """Lubin-Tate formal groups, torsion towers and explicit pairings."""


@main.command()
@group_options
@common
@click.option("--text", is_flag=True, help="print the rendered group law only")
def group(preset, p, coeffs, N, D, config_path, seed, out, text):
    """Build a formal group and check its axioms."""
    def body():
        cfg = _load_config(config_path)
        spec = _group_spec(cfg, preset, p, coeffs)
        n = _precision(cfg.get("N", N), 12)
        pack = _pack(spec, n, cfg.get("D", D))
        if text:
            click.echo(render(pack))
            return EXIT_OK
        checks = dict(pack.check_axioms())
        checks["w_relation"] = pack.check_w_relation()
        o = _Output(out or cfg.get("out"))
        o.write({"kind": "group", "group": spec.to_json(), "N": n, "D": pack.D,
                 "F": render(pack), "checks": checks})
        o.close()
        return EXIT_OK if all(checks.values()) else EXIT_FAIL
    _run(body)


@main.command()
@group_options
@common
@click.option("--level", type=int, default=1)
@click.option("--text", is_flag=True, help="print the torsion table only")
def torsion(preset, p, coeffs, N, D, config_path, seed, out, level, text):
    """Tower polynomial, different and torsion points of one level."""
    def body():
        cfg = _load_config(config_path)
        spec = _group_spec(cfg, preset, p, coeffs)
        n = _precision(cfg.get("N", N), 8)
        s = int(cfg.get("level", level))
        pack = _pack(spec, n, cfg.get("D", D))
        ring = Tower(pack, n).level(s)
        table = torsion_points(ring, s)
        if text:
            click.echo(render(table))
            return EXIT_OK
        o = _Output(out or cfg.get("out"))
        ok = ring.different_valuation() == ring.expected_different()
        o.write({"kind": "tower", "group": spec.to_json(), "level": s, "phi": render(ring),
                 "different": ring.different_valuation(), "expected": ring.expected_different(),
                 "pass": ok})
        for coord, pt in table:
            o.write({"kind": "torsion", "level": s, "coord": coord.to_json()["coord"],
                     "point": render_tower(pt)})
        o.close()
        return EXIT_OK if ok else EXIT_FAIL
    _run(body)


@main.command(name="ql")
@group_options
@common
@click.option("--level", type=int, default=1)
@click.option("--d", "d", type=int, default=None)
@click.option("--entry", "entries", multiple=True, help="symbol entry, e.g. T1 or 1+e*T1")
@click.option("--lifted", is_flag=True)
def ql_command(preset, p, coeffs, N, D, config_path, seed, out, level, d, entries, lifted):
    """QL_s of a symbol at the given level."""
    def body():
        cfg = _load_config(config_path)
        spec = _group_spec(cfg, preset, p, coeffs)
        n = _precision(cfg.get("N", N), 10)
        ents = list(cfg.get("entries", entries))
        if not ents:
            raise ConfigInvalid("give the symbol with --entry")
        dim = int(cfg.get("d", d if d is not None else len(ents)))
        s = int(cfg.get("level", level))
        pack = _pack(spec, n, cfg.get("D", D))
        F = HField(Tower(pack, n).level(s), dim)
        names = {"e": F.gen(), "pi": F.scalar(pack.pi)}
        names.update({f"T{j}": F.T(j) for j in range(1, dim)})
        symbol = [parse_element(t, F, names) for t in ents]
        value = ql(symbol, lifted=bool(cfg.get("lifted", lifted)))
        o = _Output(out or cfg.get("out"))
        o.write({"kind": "ql", "group": spec.to_json(), "level": s, "d": dim, "entries": ents,
                 "lifted": bool(lifted), "value": render(value.value), "threshold": value.threshold,
                 "valuation": "inf" if value.value.valuation() == INF else value.value.valuation()})
        o.close()
        return EXIT_OK
    _run(body)


FORMULA_CHOICES = ["iwasawa", "wiles", "artin-hasse-t", "artin-hasse-gen", "oracle"]


@main.command()
@group_options
@common
@click.option("--formula", type=click.Choice(FORMULA_CHOICES), default=None)
@click.option("--n", "n", type=int, default=1)
@click.option("--d", "d", type=int, default=1)
@click.option("--s", "s", type=int, default=None, help="descent level for the Wiles formula")
@click.option("--t", "t", type=int, default=None, help="level of M for the Artin-Hasse formula in t")
@click.option("--symbol", "symbol", multiple=True)
@click.option("--x", "x", default="e^2")
@click.option("--g-coeffs", default=None, help="coefficients of g for e_g")
@click.option("--theta", type=int, default=1)
@click.option("--log-group", type=click.Choice(["f", "g"]), default="f")
@click.option("--method", type=click.Choice(["torsion", "norm"]), default="torsion")
def pair(preset, p, coeffs, N, D, config_path, seed, out, formula, n, d, s, t, symbol, x,
         g_coeffs, theta, log_group, method):
    """Evaluate one pairing case."""
    def body():
        cfg = _load_config(config_path)
        if "case" in cfg or "symbol" in cfg:
            data = dict(cfg.get("case", cfg))
        else:
            spec = _group_spec(cfg, preset, p, coeffs)
            data = {"group": spec, "n": n, "d": d, "symbol": list(symbol), "x": x,
                    "formula": formula or "iwasawa", "s": s, "t": t, "theta": theta,
                    "log_group": log_group, "oracle_method": method, "N": N}
            if g_coeffs:
                data["g"] = GroupSpec("custom", spec.p, _coeff_list(g_coeffs))
        if formula:
            data["formula"] = formula
        case = PairingCase.from_json(data)
        result = evaluate(case)
        o = _Output(out or cfg.get("out"))
        o.write(result.to_json())
        o.close()
        return EXIT_OK
    _run(body)


@main.command()
@common
@click.option("--suite", "suites", multiple=True, help="suite name (repeatable); default all")
@click.option("--samples", type=int, default=None)
@click.option("--timings", is_flag=True, help="include per-check runtimes in the report")
@click.option("--list", "list_only", is_flag=True, help="list suite names")
def verify(config_path, seed, out, suites, samples, timings, list_only):
    """Run verification suites; exit code 1 if any check fails."""
    def body():
        if list_only:
            for name in SUITES:
                click.echo(name)
            return EXIT_OK
        data = _load_config(config_path)
        if suites:
            data["suites"] = list(suites)
        if seed is not None:
            data["seed"] = seed
        if samples is not None:
            data["samples"] = samples
        if out:
            data["out"] = out
        cfg = SuiteConfig.from_json(data)
        if os.environ.get("RECIPROC_PRECISION_OVERRIDE"):
            cfg.N = _precision(None, None)
        records = run_suite(cfg)
        records.sort(key=lambda r: (r["suite"], json.dumps(r["case"], sort_keys=True)))
        if not timings:
            for rec in records:
                rec.pop("runtime", None)
        o = _Output(cfg.out)
        for rec in records:
            o.write(rec)
        o.close()
        failed = sum(1 for r in records if not r["pass"])
        click.echo(f"{len(records) - failed}/{len(records)} checks passed", err=True)
        return EXIT_OK if not failed else EXIT_FAIL
    _run(body)


if __name__ == "__main__":  # pragma: no cover
    main()
