import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from fgen import CLOSED_TERMS, random_formula
from rsomega.hfset import (
    EMPTY, ComplexityError, EvaluationError, OmegaSet, Pi, Sigma, Universe,
    Verdict, ev_term, hf, hf_rank, nat_set, set_text, truth_delta0, truth_level, vk,
)
from rsomega.ord import Equal, Nat, OmegaPow, compare, natural_sum, omax
from rsomega.syntax import (
    BVar, mem,
    C_OMEGA, Const, PairT, SepT, UnionT, is_delta0, negate, parse_formula, parse_term,
)

E1 = hf(EMPTY)
T, F, U = Verdict.TRUE, Verdict.FALSE, Verdict.UNKNOWN


def test_universe_sizes():
    assert [len(vk(k)) for k in range(5)] == [0, 1, 2, 4, 16]
    assert len(Universe(4).members) == 16


def test_ranks():
    assert hf_rank(EMPTY) == Nat(0)
    assert hf_rank(hf(EMPTY, E1)) == Nat(2)
    assert hf_rank(OmegaSet) == OmegaPow(Nat(1))
    assert compare(hf_rank(hf(OmegaSet)), natural_sum(OmegaPow(Nat(1)), Nat(1))) is Equal


def test_canonical_text():
    assert set_text(hf(E1, EMPTY)) == "{{},{{}}}"
    assert hf(E1, EMPTY) == hf(EMPTY, E1)
    assert set_text(nat_set(3)) == "{{},{{}},{{},{{}}}}"


def test_ev_examples():
    assert ev_term(parse_term("(pair {} {})")) == E1
    assert ev_term(parse_term("(union {{{}}})")) == E1
    assert ev_term(parse_term("(sep x {{},{{}}} (mem x {{}}))")) == E1
    assert ev_term(C_OMEGA) is OmegaSet
    assert ev_term(UnionT(C_OMEGA)) is OmegaSet


def test_ev_errors():
    with pytest.raises(EvaluationError):
        ev_term(parse_term("(sep x omega (mem x {}))"))


def naive_eval(t):
    """Independent evaluator over Python frozensets."""
    if isinstance(t, Const):
        return _to_py(t.value)
    if isinstance(t, PairT):
        return frozenset([naive_eval(t.left), naive_eval(t.right)])
    if isinstance(t, UnionT):
        return frozenset(x for y in naive_eval(t.inner) for x in y)
    if isinstance(t, SepT):
        base = naive_eval(t.base)
        # matrices in these tests are single atoms "x in c" or "x notin c"
        atom = t.body
        other = naive_eval(atom.right)
        return frozenset(x for x in base if (x in other) == atom.positive)
    raise ValueError(t)


def _to_py(s):
    return frozenset(_to_py(e) for e in s.elements)


def _terms_depth(d):
    out = [Const(s) for s in vk(3)]
    for _ in range(d):
        prev = list(out)
        out += [PairT(a, b) for a, b in itertools.islice(itertools.product(prev, prev), 0, None, 7)]
        out += [UnionT(a) for a in prev[::3]]
        out += [SepT(a, mem(BVar(0), Const(E1))) for a in prev[::5]]
        random.Random(d).shuffle(out)
        out = out[:200]
    return out


def test_ev_matches_naive():
    for t in _terms_depth(3):
        assert _to_py(ev_term(t)) == naive_eval(t)


def test_truth_examples():
    assert truth_delta0(parse_formula("(mem {} {{}})")) is T
    assert truth_delta0(parse_formula("(ball x {{}} (mem x {{},{{}}}))")) is T
    assert truth_delta0(parse_formula("(bex z omega (mem z omega))"), Universe(4, 1)) is T
    assert truth_delta0(parse_formula("(ball z omega (mem z omega))"), Universe(4, 8)) is U
    assert truth_level(parse_formula("(ex z (mem {} z))"), Sigma(1), Universe(3)) is T
    assert truth_level(parse_formula("(all x (mem x {}))"), Pi(1), Universe(3)) is F
    assert truth_level(parse_formula("(ex z (and (mem {} z) (mem {{}} z)))"), Sigma(1), Universe(4)) is T


def test_complexity_errors():
    with pytest.raises(ComplexityError):
        truth_delta0(parse_formula("(ex z (mem {} z))"))
    with pytest.raises(ComplexityError):
        truth_level(parse_formula("(all x (ex y (mem x y)))"), Sigma(1), Universe(3))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_delta0_without_omega_is_decided(seed):
    f = random_formula(random.Random(seed), size=5, unbounded=False)
    assert truth_delta0(f) is not U


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9), st.integers(0, 6))
def test_fuel_monotone(seed, fuel):
    f = random_formula(random.Random(seed), size=4, unbounded=False, omega=True)
    try:
        v = truth_delta0(f, Universe(3, fuel))
    except EvaluationError:
        return
    if v is not U:
        for more in (fuel + 1, fuel + 4):
            assert truth_delta0(f, Universe(3, more)) is v


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_de_morgan(seed):
    f = random_formula(random.Random(seed), size=3)
    u = Universe(3, 4)
    s, p = __import__("rsomega.syntax", fromlist=["levels"]).levels(f)
    lvl = Sigma(max(s, 1))
    v = truth_level(f, lvl, u)
    w = truth_level(negate(f), Pi(max(s, 1)), u)
    assert w is ~v


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_level_agrees_with_delta0(seed):
    f = random_formula(random.Random(seed), size=4, unbounded=False)
    assert is_delta0(f)
    assert truth_level(f, Sigma(0), Universe(3)) is truth_delta0(f)


def test_pair_and_union_rank_laws():
    for t in CLOSED_TERMS:
        for s in CLOSED_TERMS[:5]:
            a, b = ev_term(t), ev_term(s)
            assert compare(hf_rank(ev_term(PairT(t, s))), natural_sum(omax(hf_rank(a), hf_rank(b)), Nat(1))) is Equal
        assert compare(hf_rank(ev_term(UnionT(t))), hf_rank(ev_term(t))) is not __import__("rsomega.ord").ord.Greater
