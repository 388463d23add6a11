import json

import pytest
from click.testing import CliRunner

from crystk.assembly import (
    KTheoryResult,
    check_hfin,
    check_ktheory,
    check_finite_k,
    corrupted_table,
    k_theory,
    load_goldens,
)
from crystk.cli import main
from crystk.crystal_classes import catalog, lookup
from crystk.kgroups import KExpr, assemble_hfin, quinn_complex
from crystk.lines import t_double_prime

P = KExpr.parse


def test_k_theory_examples():
    r = k_theory("A4+x(-1)_1")
    assert (r.k_minus1, r.k0_tilde, r.wh) == (P("Z^2"), P("(Z/2)^4 + inf(Z/2)"), P("inf(Z/2)"))
    r = k_theory("Gamma_6")
    assert (r.k_minus1, r.k0_tilde, r.wh) == (P("Z^2"), KExpr(), KExpr())
    r = k_theory("Gamma_5")
    assert (r.k_minus1, r.k0_tilde, r.wh) == (P("Z^7"), P("(Z/2)^6 + inf(Z/2)"), P("inf(Z/2) + NK1(ZD6)"))


def test_result_rendering():
    r = k_theory("Gamma_1")
    assert str(r) == "K_-1 = Z^2; K0~ = (Z/4)^4 + inf(Z/2) + inf(Z/4); Wh = inf(Z/2) + 2*NK1(ZD4)"
    assert r.to_json()["label"] == "S4+x(-1)_1"
    assert isinstance(r, KTheoryResult)


def test_deterministic_json():
    a = json.dumps([k_theory(G).to_json() for G in catalog()[:30]])
    b = json.dumps([k_theory(G).to_json() for G in catalog()[:30]])
    assert a == b


def test_groups_without_lines_are_proper_part_only():
    for G in catalog():
        if not t_double_prime(G.label):
            r = k_theory(G)
            assert (r.k_minus1, r.k0_tilde, r.wh) == assemble_hfin(G)


def test_result_shapes():
    for G in catalog():
        r = k_theory(G)
        for e in (r.k_minus1, r.k0_tilde, r.wh):
            assert e.free_rank <= 7 and e.z2 <= 8 and e.z4 <= 4
        assert r.k_minus1 == KExpr(free_rank=r.k_minus1.free_rank)
        assert r.wh.free_rank == r.wh.z2 == r.wh.z4 == 0


def test_omitted_groups_vanish():
    listed = load_goldens()["ktheory"]
    omitted = [G for G in catalog() if G.label not in listed]
    assert len(omitted) == 73 - len(listed) > 0
    for G in omitted:
        r = k_theory(G)
        assert r.k_minus1.is_zero() and r.k0_tilde.is_zero() and r.wh.is_zero()


def test_fault_injection_flags_only_dependents():
    bad = corrupted_table("S4xZ/2", 0, KExpr(z2=1))
    assert check_finite_k(bad) == ["finite_k S4xZ/2 q=0: got Z/2, want Z/4"]
    users = {G.label for G in catalog() if "S4xZ/2" in quinn_complex(G).vertex_types}
    assert users
    flagged = {m.split()[1] for m in check_hfin(bad)}
    assert flagged == users
    flagged = {m.split()[1] for m in check_ktheory(bad)}
    assert flagged == users
    assert check_hfin() == [] and check_ktheory() == []


runner = CliRunner()


def test_cli_ktheory():
    res = runner.invoke(main, ["ktheory", "Gamma_1"])
    assert res.exit_code == 0
    assert res.output.strip() == "K_-1 = Z^2; K0~ = (Z/4)^4 + inf(Z/2) + inf(Z/4); Wh = inf(Z/2) + 2*NK1(ZD4)"
    res = runner.invoke(main, ["ktheory", "C1+_1", "--json"])
    data = json.loads(res.output)
    assert res.exit_code == 0 and all(KExpr.from_json(data[k]).is_zero() for k in ("K_minus1", "K0_tilde", "Wh"))
    res = runner.invoke(main, ["--json", "ktheory", "Gamma_6"])
    assert json.loads(res.output)["K_minus1"]["Z"] == 2


def test_cli_usage_errors():
    assert runner.invoke(main, ["ktheory", "Gamma_9"]).exit_code == 2
    assert runner.invoke(main, ["ktheory"]).exit_code == 2
    assert runner.invoke(main, ["domain", "8"]).exit_code == 2
    assert runner.invoke(main, ["lines", "nope"]).exit_code == 2
    assert runner.invoke(main, ["frobnicate"]).exit_code == 2


def test_cli_other_commands():
    res = runner.invoke(main, ["catalog"])
    assert res.exit_code == 0 and len(res.output.splitlines()) == 73
    assert len(json.loads(runner.invoke(main, ["catalog", "--json"]).output)) == 73
    res = runner.invoke(main, ["classify", "D3+_5", "--json"])
    assert res.exit_code == 0 and len(json.loads(res.output)["integral_representation"]) == 6
    res = runner.invoke(main, ["domain", "7"])
    assert res.exit_code == 0 and "2pi/3" in res.output
    res = runner.invoke(main, ["stabilizers", "A4+x(-1)_1", "--json"])
    assert res.exit_code == 0
    res = runner.invoke(main, ["lines", "S4+x(-1)_1"])
    assert res.exit_code == 0 and res.output.startswith("S4+x(-1)_1: 5 line orbits")
    data = json.loads(runner.invoke(main, ["lines", "D''_4_2", "--json"]).output)
    assert sorted(d["structure"] for d in data) == ["D2 x| Z", "D4 x Z"]
