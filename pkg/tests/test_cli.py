import json

import pytest
from click.testing import CliRunner

from reciproc.cli import main, render, render_polynomial
from reciproc.lubin_tate import preset_pack
from reciproc.tower import Tower, torsion_points


def run(*args, env=None):
    return CliRunner().invoke(main, list(args), env=env)


def test_render_examples():
    assert render(preset_pack("mult", 3, N=6)) == "X + Y + X*Y"
    ring = Tower(preset_pack("special", 3, N=6), 6).level(1)
    assert render(ring) == "X^2 + 3"
    table = render(torsion_points(ring, 1)).splitlines()
    assert table == ["0 | 0", "1 | e", "2 | -e"]


def test_render_polynomial():
    assert render_polynomial([3, 0, 1]) == "X^2 + 3"
    assert render_polynomial([0, -1, 2]) == "2*X^2 - X"
    assert render_polynomial([]) == "0"


def test_group_command():
    r = run("group", "--preset", "mult", "--p", "3", "--text")
    assert r.exit_code == 0 and r.output.strip() == "X + Y + X*Y"
    r = run("group", "--preset", "special", "--p", "3", "--N", "8", "--D", "9")
    rec = json.loads(r.output)
    assert r.exit_code == 0 and all(rec["checks"].values())


def test_torsion_command():
    r = run("torsion", "--preset", "special", "--p", "3", "--level", "1", "--N", "6")
    lines = [json.loads(x) for x in r.output.splitlines()]
    assert r.exit_code == 0
    assert lines[0]["phi"] == "X^2 + 3" and lines[0]["pass"]
    assert [x["coord"] for x in lines[1:]] == [0, 1, 2]


def test_ql_command():
    r = run("ql", "--p", "3", "--N", "6", "--entry", "T1", "--entry", "e")
    rec = json.loads(r.output)
    assert r.exit_code == 0 and rec["valuation"] == -3 and rec["threshold"] == -2


def test_pair_command_and_exit_codes(tmp_path):
    r = run("pair", "--p", "3", "--d", "2", "--symbol", "T1", "--symbol", "e", "--x", "e^3")
    assert r.exit_code == 0
    assert json.loads(r.output) == {"coord": 1, "n": 1, "formula": "iwasawa",
                                    "precision_used": 8, "domain_checks": {"valuation_bound": True}}
    r = run("pair", "--p", "3", "--symbol", "4", "--x", "e")
    assert r.exit_code == 1 and json.loads(r.output)["error"] == "DomainViolation"
    r = run("pair", "--p", "3", "--d", "2", "--symbol", "e", "--x", "e^2")
    assert r.exit_code == 2
    cfg = tmp_path / "case.json"
    cfg.write_text(json.dumps({"case": {"group": {"preset": "mult", "p": 3}, "n": 1, "d": 1,
                                        "symbol": ["4"], "x": "e"}}))
    r = run("pair", "--config", str(cfg), "--formula", "oracle")
    assert r.exit_code == 0 and json.loads(r.output)["coord"] == 1


def test_precision_override_env():
    r = run("pair", "--p", "3", "--d", "2", "--symbol", "T1", "--symbol", "e", "--x", "e^3",
            env={"RECIPROC_PRECISION_OVERRIDE": "10"})
    assert json.loads(r.output)["precision_used"] == 10


def test_verify_command(tmp_path):
    out1, out2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (out1, out2):
        r = run("verify", "--suite", "ql-galois", "--suite", "tower-different", "--seed", "3",
                "--out", str(out))
        assert r.exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert all("runtime" not in json.loads(x) for x in out1.read_text().splitlines())
    r = run("verify", "--suite", "tower-different", "--timings")
    assert all("runtime" in json.loads(x) for x in r.stdout.splitlines())


def test_verify_failure_and_config_errors(tmp_path):
    r = run("verify", "--suite", "oracle-vs-iwasawa", "--samples", "8")
    assert r.exit_code == 1
    assert run("verify", "--suite", "nope").exit_code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("verify", "--config", str(bad)).exit_code == 2


def test_verify_list():
    r = run("verify", "--list")
    assert "steinberg" in r.output.split()
