"""Weakening, inversion, reduction and cut elimination on lazy derivations.

All four functions return a new root immediately; every child is a thunk or a
wrapping Branch, so no branch function of the input is invoked until the
output is navigated.
"""
from __future__ import annotations

from typing import Iterable, List, Sequence

from . import ord as O
from .rsderiv import BRANCHING, Branch, Derivation, MalformedDerivation, Rule, axiom
from .syntax import decompose, formula_rank, is_conjunctive, is_delta0, negate, serialize


def _guard(parent: Derivation, child: Derivation) -> Derivation:
    if not O.lt(child.length, parent.length):
        raise MalformedDerivation(
            f"child length {O.to_text(child.length)} not below {O.to_text(parent.length)}")
    return child


def _sub(w: Derivation, x) -> Derivation:
    return _guard(w, w.child(x))


def _rebuild(w: Derivation, side, kid_fn, length=None, rank=None) -> Derivation:
    """Copy w's last inference with a new side and children kid_fn(x)."""
    length = w.length if length is None else length
    rank = w.rank if rank is None else rank
    if w.rule in BRANCHING:
        br = Branch(lambda s: kid_fn(s), label=f"{w.rule.value}")
        return Derivation(w.rule, w.principal, side, length, rank, branch=br)
    kids = [(lambda i=i: kid_fn(i)) for i in range(w.arity)]
    return Derivation(w.rule, w.principal, side, length, rank, kids,
                      witness=w.witness, minor=w.minor)


# -- weakening -----------------------------------------------------------------

def wkn(extra: Iterable, w: Derivation) -> Derivation:
    """A derivation of End(w) plus `extra`, no longer and of no higher rank."""
    extra = frozenset(extra)
    if extra <= w.end:
        return w
    if w.rule is Rule.AXIOM:
        return axiom(w.end | extra)
    if w.rule is Rule.CUT and w.principal in extra:
        # the cut formula is already present: keep the premise that has it
        return wkn(extra, _sub(w, 0))
    return _rebuild(w, w.side | extra, lambda x: wkn(extra, _sub(w, x)))


# -- inversion -----------------------------------------------------------------

def inv(target, w: Derivation, i) -> Derivation:
    """From a derivation of Gamma, A with A a conjunction, one of Gamma, A_i."""
    if is_delta0(target) or not is_conjunctive(target):
        raise MalformedDerivation("inversion needs a non-Delta0 conjunctive formula")
    if target not in w.end:
        raise MalformedDerivation(f"{serialize(target)} is not in the end sequent")
    d = decompose(target)
    if d.binary and i not in (0, 1):
        raise MalformedDerivation(f"index {i!r} out of range")
    ai = d(i)
    return _inv(target, ai, i, w)


def _inv(A, ai, i, w: Derivation) -> Derivation:
    if w.rule is Rule.AXIOM:
        return axiom((w.end - {A}) | {ai})
    if w.rule is not Rule.CUT and w.principal == A:
        k = _sub(w, i)
        # A may also sit among the side formulas, in which case keep inverting
        return _inv(A, ai, i, k) if A in k.end else k
    side = (w.side - {A}) | {ai}

    def kid(x):
        k = _sub(w, x)
        if w.minor_formula(x) == A:
            return wkn({ai}, k)
        return _inv(A, ai, i, k) if A in k.end else wkn({ai}, k)

    return _rebuild(w, side, kid)


# -- reduction -----------------------------------------------------------------

def red(C, w0: Derivation, w1: Derivation) -> Derivation:
    """Eliminate one cut on C, with rank(C) above Omega.

    End(w0) holds C and End(w1) holds negate(C); the result derives
    (End(w0) - {C}) | (End(w1) - {negate(C)}) with length at most a # b.
    """
    nC = negate(C)
    if C not in w0.end or nC not in w1.end:
        raise MalformedDerivation("reduction inputs do not carry the cut formula")
    if not O.lt(O.Omega, formula_rank(C)):
        raise MalformedDerivation("reduction needs a cut formula of rank above Omega")
    return _red(C, nC, w0, w1)


def _end(C, nC, w0, w1):
    return (w0.end - {C}) | (w1.end - {nC})


def _rank(*ws):
    return O.omax(*(w.rank for w in ws))


def _red(C, nC, w0: Derivation, w1: Derivation) -> Derivation:
    gamma = _end(C, nC, w0, w1)
    if w0.rule is Rule.AXIOM or w1.rule is Rule.AXIOM:
        # the true Delta0 formula is never C or its negation
        return axiom(gamma)
    a, b = w0.length, w1.length
    ab = O.natural_sum(a, b)
    p0 = w0.rule is not Rule.CUT and w0.principal == C
    p1 = w1.rule is not Rule.CUT and w1.principal == nC
    if not p0:
        rest = w1.end - {nC}

        def kid0(x):
            u = _sub(w0, x)
            m = w0.minor_formula(x)
            if m == C:
                return wkn(rest, u)
            return _red(C, nC, u, wkn({m}, w1))

        return _rebuild(w0, (w0.side - {C}) | rest, kid0, ab, _rank(w0, w1))
    if not p1:
        rest = w0.end - {C}

        def kid1(x):
            u = _sub(w1, x)
            m = w1.minor_formula(x)
            if m == nC:
                return wkn(rest, u)
            return _red(C, nC, wkn({m}, w0), u)

        return _rebuild(w1, (w1.side - {nC}) | rest, kid1, ab, _rank(w0, w1))
    if is_conjunctive(C):
        # put the disjunctive side first
        C, nC, w0, w1 = nC, C, w1, w0
    return _principal(C, nC, w0, w1, gamma, ab)


def _principal(C, nC, w0: Derivation, w1: Derivation, gamma, ab) -> Derivation:
    if w0.rule in (Rule.OR0, Rule.OR1):
        i = 0 if w0.rule is Rule.OR0 else 1
    elif w0.rule in (Rule.BEX, Rule.EX):
        i = w0.witness
    else:
        raise MalformedDerivation(f"{w0.rule.value} cannot introduce {serialize(C)}")
    ak = w0.minor_formula(0)
    # the eliminated formula A_k has rank below rank(C), so rank(A_k)+1 fits in r
    r = O.omax(_rank(w0, w1), O.succ(formula_rank(ak)))

    def left():
        u = _sub(w0, 0)
        return _red(C, nC, wkn({C}, u), wkn({ak}, w1))

    def right():
        return wkn(gamma, _inv(nC, negate(ak), i, w1))

    def left_fixed():
        d = left()
        return d if d.end == gamma | {ak} else wkn(gamma | {ak}, d)

    return Derivation(Rule.CUT, ak, gamma, ab, r, [left_fixed, right])


# -- cut elimination -------------------------------------------------------------

def cut_elim(w: Derivation) -> Derivation:
    """Lower the rank bound of w from r+1 to r (r above Omega).

    The root length a becomes omega^a.
    """
    top = w.rank
    r = _predecessor(top)
    return _j(w, r)


def omega_offset(rank):
    """m when rank is Omega+m, else None."""
    if rank == O.Omega:
        return 0
    if isinstance(rank, O.Sum) and len(rank.parts) == 2 and rank.parts[0] == O.Omega \
            and isinstance(rank.parts[1], O.Nat):
        return rank.parts[1].n
    return None


def _predecessor(rank):
    m = omega_offset(rank)
    if m is not None and m >= 2:
        return O.succ(O.Omega, m - 1)
    raise MalformedDerivation(f"cut elimination needs rank Omega+m with m >= 2, got {O.to_text(rank)}")


def _j(w: Derivation, r) -> Derivation:
    if w.rule is Rule.AXIOM or O.le(w.rank, r):
        return w
    top = O.succ(r)
    if not O.le(w.rank, top):
        raise MalformedDerivation(f"rank {O.to_text(w.rank)} above {O.to_text(top)}")
    a = O.OmegaPow(w.length)
    if w.rule is Rule.CUT and O.eq(formula_rank(w.principal), r):
        A = w.principal
        u, v = _j(_sub(w, 0), r), _j(_sub(w, 1), r)
        out = red(A, u, v)
        if out.end != w.end:
            out = wkn(w.end, out)
        return out.relabel(length=a, rank=r)
    return _rebuild(w, w.side, lambda x: _j(_sub(w, x), r), a, r)


# -- contracts -----------------------------------------------------------------

def check_contract(op: str, out: Derivation, ins: Sequence[Derivation], formula=None, index=None) -> List[str]:
    """Root end-sequent and bound contracts of one transformer application.

    wkn takes the added formulas in `formula`, inv the conjunction and `index`,
    red the cut formula.
    """
    bad = []
    w = ins[0]
    if op == "wkn":
        end, length, rank = w.end | frozenset(formula), w.length, w.rank
    elif op == "inv":
        end = (w.end - {formula}) | {decompose(formula)(index)}
        length, rank = w.length, w.rank
    elif op == "red":
        w1 = ins[1]
        end = _end(formula, negate(formula), w, w1)
        length = O.natural_sum(w.length, w1.length)
        rank = O.omax(w.rank, w1.rank, formula_rank(formula))
    elif op == "cutelim":
        end, length, rank = w.end, O.OmegaPow(w.length), _predecessor(w.rank)
    else:
        raise ValueError(f"unknown transformer {op!r}")
    if out.end != end:
        bad.append("end sequent differs from the contract")
    if not O.le(out.length, length):
        bad.append(f"length {O.to_text(out.length)} above {O.to_text(length)}")
    if not O.le(out.rank, rank):
        bad.append(f"rank {O.to_text(out.rank)} above {O.to_text(rank)}")
    return bad
