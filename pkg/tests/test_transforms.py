import pytest

from contracts import check_all
from rsomega import ord as O
from rsomega.embed import embed_proof
from rsomega.kpcalc import load_corpus
from rsomega.rsderiv import (
    Derivation, MalformedDerivation, Rule, axiom, branch_calls, check_wf_bounded, navigate,
    node_info, reset_branch_calls, walk,
)
from rsomega.syntax import (
    And, BVar, C_EMPTY, Or, UExists, UForall, decompose, formula_rank, instantiate, mem,
    negate, nmem, parse_formula, parse_term,
)
from rsomega.transforms import check_contract, cut_elim, inv, omega_offset, red, wkn

e0, e1 = C_EMPTY, parse_term("{{}}")
TRUE = mem(e0, e1)
P = UExists(mem(e0, BVar(0)))             # exists z ({} in z), rank Omega
Q = UExists(mem(e1, BVar(0)))
C = Or(P, Q)                              # rank Omega + 1


def embedded(name):
    pf = load_corpus(name)
    return embed_proof(pf.proof, pf.subst)


def ex_P(side=frozenset()):
    """Gamma, P via the witness {{}}."""
    kid = axiom(side | {mem(e0, e1)})
    return Derivation(Rule.EX, P, side, O.Nat(1), O.ZERO, [kid], witness=e1)


def and_notC():
    nP, nQ = negate(P), negate(Q)
    return Derivation(Rule.AND, negate(C), {TRUE}, O.Nat(1), O.ZERO,
                      [axiom({TRUE, nP}), axiom({TRUE, nQ})])


# -- weakening -------------------------------------------------------------------

def test_wkn_axiom():
    B = parse_formula("(mem {} {})")
    out = wkn({B}, axiom({TRUE}))
    assert out.rule is Rule.AXIOM and out.end == {TRUE, B}


def test_wkn_empty_is_identity():
    w = embedded("bchain")
    assert wkn(set(), w) is w


def test_wkn_absorbs_cut():
    w = embedded("cut")
    A = w.principal
    out = wkn({A}, w)
    assert out.end == w.end | {A}
    # the first premise already ends in Gamma, A
    assert out is w.kid(0)


def test_wkn_keeps_bounds_everywhere():
    w = embedded("forall")
    extra = {parse_formula("(all x (mem x x))")}
    out = wkn(extra, w)
    for (a1, n1), (a2, n2) in zip(walk(w, "small", 4), walk(out, "small", 4)):
        assert a1 == a2
        assert O.le(n2.length, n1.length) and O.le(n2.rank, n1.rank)
        assert n2.end == n1.end | frozenset(extra)


# -- inversion ---------------------------------------------------------------

def test_inv_and_principal_bypass():
    A = And(P, Q)
    k0, k1 = ex_P(), axiom({Q, TRUE})
    w = Derivation(Rule.AND, A, set(), O.Nat(2), O.ZERO, [k0, k1])
    assert inv(A, w, 0) is k0
    assert inv(A, w, 1) is k1


def test_inv_forall_branch():
    w = embedded("forall")
    A = w.principal
    out = inv(A, w, e0)
    assert node_info(out) == node_info(navigate(w, (e0,)))
    assert out.end == {instantiate(A.body, e0)}


def test_inv_axiom():
    A = And(P, Q)
    out = inv(A, axiom({TRUE, A}), 1)
    assert out.rule is Rule.AXIOM and out.end == {TRUE, Q}


def test_inv_errors():
    with pytest.raises(MalformedDerivation):
        inv(And(TRUE, TRUE), axiom({And(TRUE, TRUE)}), 0)
    with pytest.raises(MalformedDerivation):
        inv(And(P, Q), axiom({TRUE}), 0)
    with pytest.raises(MalformedDerivation):
        inv(And(P, Q), axiom({TRUE, And(P, Q)}), 2)


# -- reduction ---------------------------------------------------------------------

def test_red_axiom():
    out = red(C, axiom({TRUE, C}), and_notC())
    assert out.rule is Rule.AXIOM and out.end == {TRUE}


def test_red_or0_principal():
    w0 = Derivation(Rule.OR0, C, set(), O.Nat(2), O.ZERO, [ex_P()])
    w1 = and_notC()
    out = red(C, w0, w1)
    assert out.rule is Rule.CUT and out.principal == P
    assert out.end == {TRUE}
    assert out.kid(0).end == {TRUE, P}
    assert out.kid(1).end == {TRUE, negate(P)}
    assert O.eq(out.length, O.natural_sum(w0.length, w1.length))
    assert O.le(out.rank, formula_rank(C))
    assert check_contract("red", out, [w0, w1], formula=C) == []


def test_red_length_bookkeeping():
    w = O.OMEGA_FIN
    w0 = Derivation(Rule.OR0, C, set(), w, O.ZERO, [ex_P()])
    w1 = and_notC().relabel(length=O.succ(w))
    out = red(C, w0, w1)
    assert O.to_text(out.length) == "w^(1) + w^(1) + 1"


def test_red_quantifier_principal():
    w = embedded("cut")
    A = w.principal
    out = red(A, w.kid(0), w.kid(1))
    assert out.rule is Rule.CUT
    assert O.lt(formula_rank(out.principal), formula_rank(A))
    assert out.end == w.end
    assert check_wf_bounded(out, "std", 6).ok


def test_red_preconditions():
    with pytest.raises(MalformedDerivation):
        red(P, ex_P(), axiom({negate(P), TRUE}))  # rank Omega is not above Omega
    with pytest.raises(MalformedDerivation):
        red(C, axiom({TRUE}), and_notC())


# -- cut elimination -------------------------------------------------------------

def test_cut_elim_axiom():
    ax = axiom({TRUE}).relabel(rank=O.succ(O.Omega, 2))
    assert cut_elim(ax) is ax


def test_cut_elim_top_cut():
    w = embedded("cut")
    assert omega_offset(w.rank) == 2
    out = cut_elim(w)
    assert out.end == w.end
    assert out.rank == O.succ(O.Omega)
    assert out.length == O.OmegaPow(w.length)
    assert out.rule is Rule.CUT and O.lt(formula_rank(out.principal), formula_rank(w.principal))
    assert check_wf_bounded(out, "std", 6).ok


def test_cut_elim_length_example():
    # a cut on C with root length Omega * w
    a = O.omega_mul_left(O.OMEGA_FIN)
    w0 = Derivation(Rule.OR0, C, {TRUE}, O.Nat(2), O.ZERO, [ex_P(frozenset({TRUE}))])
    w = Derivation(Rule.CUT, C, {TRUE}, a, O.succ(O.Omega, 2), [w0, and_notC()])
    assert check_wf_bounded(w, "std", 4).ok
    out = cut_elim(w)
    assert O.to_text(out.length) == "w^(w^(W + 1))"
    assert out.rank == O.succ(O.Omega) and out.end == {TRUE}
    assert out.rule is Rule.CUT and out.principal == P


def test_cut_elim_preconditions():
    with pytest.raises(MalformedDerivation):
        cut_elim(embedded("forall"))  # rank Omega
    with pytest.raises(MalformedDerivation):
        cut_elim(embedded("cut").relabel(rank=O.succ(O.Omega)))


# -- laziness and contracts ------------------------------------------------------

def test_transformers_are_lazy():
    w = embedded("cut")
    reset_branch_calls()
    # inv at a principal forall returns the branch child itself, so it is left out
    outs = [cut_elim(w), wkn({TRUE}, w), red(w.principal, w.kid(0), w.kid(1)), wkn({P}, w.kid(0))]
    assert branch_calls() == 0
    for out in outs:
        check_wf_bounded(out, "small", 4)
    assert branch_calls() > 0


def test_contracts_small_battery():
    n, bad = check_all("small", 4, 4)
    assert n > 100
    assert bad == []


def test_decompose_index_sets():
    A = UForall(mem(BVar(0), e0))
    assert not decompose(A).binary
    assert decompose(And(P, Q)).binary
    assert nmem(e0, e0) == negate(mem(e0, e0))
