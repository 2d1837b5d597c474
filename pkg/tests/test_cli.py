import json

import jsonschema
import pytest

from rsomega import ord as O
from rsomega.cli import (
    SABOTAGES, AuditRefused, main, parse_subst, reflect, report_schema_path, strip_timings,
    verify_truth_walk,
)
from rsomega.embed import col, embed_proof, lem
from rsomega.hfset import Universe, Verdict
from rsomega.kpcalc import corpus_dir, load_corpus
from rsomega.rsderiv import Derivation, Rule, axiom
from rsomega.syntax import BVar, C_EMPTY, UExists, mem, negate, parse_term

e0, e1 = C_EMPTY, parse_term("{{}}")
SCHEMA = json.loads(report_schema_path().read_text())
PAIR = str(corpus_dir() / "pair.kp")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# -- pipeline ----------------------------------------------------------------------

def test_reflect_pair():
    rep = reflect(load_corpus("pair").proof, {"a": e0, "b": e1}, Universe(4, 8))
    assert rep.ok and rep.truth_verdict is Verdict.TRUE
    assert O.le(rep.final_rank, O.succ(O.Omega))
    assert rep.stages and rep.stage_names()[0] == "check"


def test_reflect_cut_runs_m_minus_one_passes():
    pf = load_corpus("cut")
    rep = reflect(pf)
    m = pf.expect["m"]
    assert rep.cut_elim_passes == m - 1
    assert rep.ok


def test_stage_monotonicity():
    rep = reflect(load_corpus("cut"))
    roots = [s.info for s in rep.stages if s.name in ("embed", "cut_elim")]
    for a, b in zip(roots, roots[1:]):
        assert O.succ(b.rank_bound) == a.rank_bound
        assert b.length_bound == O.OmegaPow(a.length_bound)
    assert roots[-1].rank_bound == O.succ(O.Omega)


@pytest.mark.parametrize("name", sorted(SABOTAGES))
def test_sabotage_caught_at_stage(name):
    rep = reflect(load_corpus("cut"), sabotage=name)
    assert rep.aborted_at == SABOTAGES[name].stage
    assert not rep.ok and rep.violations


def test_false_axiom_reports_mutated_address():
    rep = reflect(load_corpus("cut"), sabotage="false-axiom")
    addr = rep.sabotage["address"]
    found = [(s, a, m) for s, a, m in rep.violations if m == "no true Delta0 formula"]
    assert found and found[0][0] == "wf"
    from rsomega.rsderiv import addr_text
    assert addr_text(found[0][1]) == addr


def test_invalid_proof_aborts_at_check():
    rep = reflect(load_corpus("forall"), sabotage="eigenvariable")
    assert rep.aborted_at == "check"
    assert "eigenvariable" in rep.violations[0][2]


def test_open_substitution_aborts_at_embed():
    rep = reflect(load_corpus("pair").proof, {"a": e0})
    assert rep.aborted_at == "embed"


def test_report_matches_schema_and_is_idempotent():
    a = reflect(load_corpus("cut")).as_json()
    b = reflect(load_corpus("cut")).as_json()
    jsonschema.validate(a, SCHEMA)
    assert json.dumps(strip_timings(a), sort_keys=True) == json.dumps(strip_timings(b), sort_keys=True)
    for name in SABOTAGES:
        jsonschema.validate(reflect(load_corpus("cut"), sabotage=name).as_json(), SCHEMA)


# -- audit walk --------------------------------------------------------------------

def test_walk_lem_delta0():
    w = lem(mem(e0, e1))
    assert verify_truth_walk(w).verdict is Verdict.TRUE


def test_walk_cut_node():
    P = UExists(mem(e0, BVar(0)))
    k0 = Derivation(Rule.EX, P, {mem(e0, e1)}, O.Nat(1), O.ZERO, [axiom({mem(e0, e1)})], witness=e1)
    k1 = axiom({mem(e0, e1), negate(P)})
    w = Derivation(Rule.CUT, P, {mem(e0, e1)}, O.Nat(2), O.succ(O.Omega), [k0, k1])
    walk = verify_truth_walk(w, fuel=2)
    assert walk.verdict is Verdict.TRUE
    assert [a for a, _, _ in walk.visited] == [(), (0,), (1,)]
    assert walk.cuts == [((), "(ex x0 (mem {} x0))", Verdict.TRUE)]


def test_walk_sigma_ref():
    w = col(e1, mem(BVar(1), BVar(0)))
    walk = verify_truth_walk(w, fuel=4)
    assert walk.reflections
    assert all(va is vr for _, va, vr in walk.reflections)
    assert walk.verdict is Verdict.TRUE


def test_walk_refuses_high_rank():
    w = embed_proof(load_corpus("cut").proof, {})
    with pytest.raises(AuditRefused):
        verify_truth_walk(w)


# -- command line ------------------------------------------------------------------

def test_ord_cmp(capsys):
    assert run(capsys, "ord", "cmp", "w^(W)", "W")[:2] == (0, "=\n")
    assert run(capsys, "ord", "cmp", "1", "w")[1] == "<\n"
    assert run(capsys, "ord", "nsum", "w + 1", "w^(2)")[1] == "w^(2) + w^(1) + 1\n"
    assert run(capsys, "ord", "below-eps", "e(W + 1)")[:2] == (1, "no\n")
    assert run(capsys, "ord", "below-eps", "w^(W + 1)")[:2] == (0, "yes 2\n")
    assert run(capsys, "ord", "below-eps", "W + 1")[:2] == (0, "yes 1\n")
    assert run(capsys, "ord", "below-eps", "w^(W)")[:2] == (0, "yes 0\n")


def test_kp_check(capsys):
    assert run(capsys, "kp", "check", PAIR)[:2] == (0, "valid\n")
    code, out, _ = run(capsys, "--json", "kp", "check", "bchain")
    assert code == 0 and json.loads(out)["k"] == 2


def test_kp_check_invalid(tmp_path, capsys):
    bad = tmp_path / "bad.kp"
    bad.write_text("(proof (or 0 (or (mem a b) (nmem a b)) (axiom logical (formula (mem b a)))))")
    code, out, _ = run(capsys, "kp", "check", str(bad))
    assert code == 1 and out.startswith("invalid")


def test_reflect_cli(capsys):
    code, out, _ = run(capsys, "reflect", PAIR, "--subst", "a={} b={{}}")
    rep = json.loads(out)
    assert code == 0 and rep["truth_verdict"] == "true"
    jsonschema.validate(rep, SCHEMA)
    code, out2, _ = run(capsys, "reflect", PAIR, "--subst", "a={} b={{}}", "--no-timings")
    code, out3, _ = run(capsys, "reflect", PAIR, "--subst", "a={} b={{}}", "--no-timings")
    assert out2 == out3


def test_reflect_cli_sabotage(capsys):
    code, out, _ = run(capsys, "reflect", "cut", "--sabotage", "skip-cutelim")
    assert code == 1 and json.loads(out)["aborted_at"] == "bounds"


def test_rs_commands(capsys):
    code, out, _ = run(capsys, "--depth", "4", "rs", "embed", "cut", "--audit-bounds")
    assert code == 0 and "bounds ok" in out
    code, out, _ = run(capsys, "rs", "dump", "forall", "--depth", "2", "--battery", "small")
    assert code == 0 and "[omega]" in out
    code, out, _ = run(capsys, "rs", "transform", "cut", "--op", "cutelim", "--depth", "4")
    d = json.loads(out)
    assert code == 0 and d["contract"] == [] and d["wf"]["ok"]
    assert d["trace"][0]["rank"] == "W + 1"


def test_usage_errors(capsys):
    assert run(capsys, "ord", "cmp", "1")[0] == 2
    code, _, err = run(capsys, "kp", "check", "no-such-file")
    assert code == 2 and "no such proof file" in err
    code, _, err = run(capsys, "ord", "cmp", "w^(", "1")
    assert code == 2 and err
    code, _, err = run(capsys, "--battery", "nope", "kp", "check", "pair")
    assert code == 2


def test_parse_subst():
    s = parse_subst("a={} b={{}, {{}}}")
    assert s == {"a": e0, "b": parse_term("{{},{{}}}")}
    assert parse_subst("") == {}
    with pytest.raises(ValueError):
        parse_subst("{} a={}")
