import pytest
from hypothesis import given, settings, strategies as st

from rsomega import ord as O
from rsomega.embed import embed_proof
from rsomega.kpcalc import corpus, load_corpus
from rsomega.rsderiv import (
    BATTERY_VERSION, Branch, Derivation, Empty, MalformedDerivation, Rule, axiom,
    branch_calls, check_quasicode, check_wf_bounded, dump, get_battery, navigate,
    node_info, reset_branch_calls, set_branch_cache, standard_battery, walk,
)
from rsomega.syntax import (
    BVar, C_EMPTY, And, UExists, formula_rank, instantiate, mem, nmem, parse_term, reflect_formula,
)

e0, e1 = C_EMPTY, parse_term("{{}}")
TRUE = mem(e0, e1)
FALSE = nmem(e0, e1)


def embedded(name):
    pf = load_corpus(name)
    return embed_proof(pf.proof, pf.subst)


def test_navigate_basics():
    w = embedded("cut")
    assert navigate(w, ()) is w
    ax = axiom({TRUE})
    assert navigate(ax, (0,)) is Empty
    assert navigate(Empty, (0,)) is Empty


def test_navigate_branch_child():
    w = embedded("forall")
    k = navigate(w, (e0,))
    body = w.principal.body
    assert instantiate(body, e0) in k.end
    assert w.side <= k.end


@pytest.mark.parametrize("name", ["cut", "bchain", "col"])
def test_navigate_composes(name):
    w = embedded(name)
    for addr, node in walk(w, "small", 4):
        for i in range(len(addr) + 1):
            mid = navigate(w, addr[:i])
            assert node_info(navigate(mid, addr[i:])) == node_info(node)


def test_branch_is_pure():
    w = embedded("bchain")
    addrs = [a for a, _ in walk(w, "small", 4) if len(a) == 3]
    assert addrs
    for addr in addrs:
        assert node_info(navigate(w, addr)) == node_info(navigate(w, addr))


def test_node_info_examples():
    assert node_info(axiom({TRUE})).end_sequent == {TRUE}
    w = embedded("cut")
    assert w.rule is Rule.CUT
    assert w.principal not in node_info(w).end_sequent
    col = embedded("col")
    refs = [n for _, n in walk(col, "small", 6) if n.rule is Rule.SIGMA_REF]
    assert refs and node_info(refs[0]).rule is Rule.SIGMA_REF


def test_quasicode():
    A = And(TRUE, TRUE)
    good = Derivation(Rule.AND, A, set(), O.Nat(1), O.ZERO, [axiom({TRUE}), axiom({TRUE})])
    assert check_quasicode(good)
    one = Derivation(Rule.AND, A, set(), O.Nat(1), O.ZERO, [axiom({TRUE})])
    assert not check_quasicode(one)
    ball = Derivation(Rule.BALL, A, set(), O.Nat(1), O.ZERO, branch=Branch(lambda s: axiom({TRUE})))
    assert not check_quasicode(ball)
    with pytest.raises(MalformedDerivation):
        node_info(one)


@pytest.mark.parametrize("pf", corpus(), ids=lambda pf: pf.name)
def test_corpus_embeddings_are_well_formed(pf):
    w = embed_proof(pf.proof, pf.subst)
    rep = check_wf_bounded(w, "std", 6)
    assert rep.ok, rep.violations[:3]
    assert rep.explored >= 1


def test_length_not_strictly_below():
    A = And(TRUE, TRUE)
    w = Derivation(Rule.AND, A, set(), O.ZERO, O.ZERO, [axiom({TRUE}), axiom({TRUE})])
    rep = check_wf_bounded(w, "std", 2)
    assert ((), "length not strictly below at child 0") in rep.violations


def test_false_axiom():
    rep = check_wf_bounded(axiom({FALSE}), "std", 1)
    assert rep.violations == [((), "no true Delta0 formula")]


def test_sigma_ref_conditions():
    A = UExists(mem(e0, BVar(0)))
    P = reflect_formula(A)
    kid = Derivation(Rule.EX, A, set(), O.Nat(1), O.ZERO, [axiom({mem(e0, e1)})], witness=e1)
    low = Derivation(Rule.SIGMA_REF, P, set(), O.Nat(2), O.ZERO, [kid], minor=A)
    assert "SigmaRef length must exceed Omega" in [m for _, m in check_wf_bounded(low, "std", 2).violations]
    high = Derivation(Rule.SIGMA_REF, P, set(), O.succ(O.Omega), O.ZERO, [kid], minor=A)
    assert check_wf_bounded(high, "std", 3).ok


def test_cut_rank_condition():
    w = embedded("cut")
    bad = w.relabel(rank=O.Omega)
    msgs = [m for _, m in check_wf_bounded(bad, "std", 2).violations]
    assert "cut formula rank + 1 exceeds the rank bound" in msgs


@pytest.mark.parametrize("pf", corpus(), ids=lambda pf: pf.name)
def test_cut_descendants_fit_rank(pf):
    w = embed_proof(pf.proof, pf.subst)
    for addr, node in walk(w, "std", 5):
        if node.rule is Rule.CUT:
            assert O.le(O.succ(formula_rank(node.principal)), node.rank)
            # and every ancestor on the path
            for i in range(len(addr)):
                assert O.le(O.succ(formula_rank(node.principal)), navigate(w, addr[:i]).rank)


def test_standard_battery():
    b = standard_battery()
    assert len(b) == len(set(b)) == 10
    assert get_battery("std") == b
    assert BATTERY_VERSION == 1
    with pytest.raises(ValueError):
        get_battery("nope")
    with pytest.raises(ValueError):
        get_battery([])


def test_branch_counter_and_cache():
    reset_branch_calls()
    w = embedded("forall")
    assert branch_calls() == 0
    navigate(w, (e0,))
    navigate(w, (e0,))
    assert branch_calls() == 2
    set_branch_cache(True)
    try:
        w = embedded("forall")
        assert navigate(w, (e0,)) is navigate(w, (e0,))
    finally:
        set_branch_cache(False)
    w = embedded("forall")
    assert navigate(w, (e0,)) is not navigate(w, (e0,))


def test_dump_lists_battery_labels():
    text = dump(embedded("forall"), "small", 2)
    assert "[{}]" in text and "[omega]" in text


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 9), max_size=4))
def test_navigate_never_raises_on_shape(path):
    w = embedded("cut")
    bat = get_battery("std")
    sigma = []
    node = w
    for i in path:
        if node is Empty:
            break
        if node.rule in (Rule.BALL, Rule.ALL):
            sigma.append(bat[i])
        else:
            sigma.append(i % 3)
        node = navigate(w, sigma)
    assert node is Empty or node_info(node).end_sequent == node.end
