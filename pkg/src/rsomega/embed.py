"""Embedding finitary KP proofs into infinitary derivations.

The axiom builders (lem, ext, ind, pair, union, inf, sep, col) produce rank-0
derivations of the axiom instances. embed_proof walks a checked FinProof under
a substitution of closed terms for free variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import ord as O
from .kpcalc import (
    FinProof, check_fin, mk_axiom, col_premise, count_k, ind_hypothesis, inf_formula, minor_of,
    pair_formula, sep_formula, union_formula,
)
from .rsderiv import BRANCHING, Branch, Derivation, Rule, axiom, get_battery
from .transforms import omega_offset, wkn
from .syntax import (
    And, BExists, BForall, C_EMPTY, C_OMEGA, Const, FVar, MemAtom, Or, PairT, SepT,
    UExists, UForall, UnionT, decompose, equals, formula_rank, free_vars, instantiate,
    is_closed, is_conjunctive, is_delta0, negate, no, reflect_formula, set_rank, subst_free,
)

ZERO = O.ZERO


class EmbedError(ValueError):
    pass


@dataclass(frozen=True)
class NoMeasure:
    value: object

    def __str__(self):
        return O.to_text(self.value)


def no_measure(*fs) -> NoMeasure:
    """no(A) = w^rank(A); a sequent gets the natural sum over its members."""
    return NoMeasure(no(*fs))


def _node(rule, principal, side, length, kids=(), branch=None, witness=None, minor=None):
    return Derivation(rule, principal, side, length, ZERO, kids, branch, witness, minor)


def _or(principal, side, kid: Derivation, i: int, length=None) -> Derivation:
    length = O.succ(kid.length) if length is None else length
    return _node(Rule.OR1 if i else Rule.OR0, principal, side, length, [kid])


def join_or(d: Derivation, x: Or) -> Derivation:
    """From a derivation holding both disjuncts of x, one of (End - disjuncts) + x."""
    d1 = _or(x, d.end - {x.left}, d, 0)
    if x.right == x.left:
        return d1
    return _or(x, d1.end - {x.right}, d1, 1)


# -- excluded middle ------------------------------------------------------------------

def lem(a) -> Derivation:
    """A derivation of {A, not A} of length at most no(A, not A) and rank 0."""
    if is_delta0(a):
        return axiom({a, negate(a)})
    if is_conjunctive(a):
        a = negate(a)
    na = negate(a)
    top = no(a, na)
    if isinstance(a, Or):
        kids = []
        for i, ai in enumerate((a.left, a.right)):
            sub = lem(ai)
            kids.append(_or(a, {negate(ai)}, sub, i, O.succ(no(ai, negate(ai)))))
        return _node(Rule.AND, na, {a}, top, kids)
    d = decompose(a)
    nd = decompose(na)
    rule_all = Rule.BALL if isinstance(a, BExists) else Rule.ALL
    rule_ex = Rule.BEX if isinstance(a, BExists) else Rule.EX

    def branch(s):
        b = d(s)
        return _node(rule_ex, a, {nd(s)}, O.succ(no(b, negate(b))), [lem(b)], witness=s)

    return _node(rule_all, na, {a}, top, branch=Branch(branch, "lem"))


# -- extensionality -------------------------------------------------------------------

def neq(s, t):
    return negate(equals(s, t))


def ext(a, svec: Sequence, tvec: Sequence, names: Optional[Sequence[str]] = None) -> Derivation:
    """A derivation of s1!=t1, ..., not A(s), A(t) for A with free variables `names`."""
    if names is None:
        names = sorted(free_vars(a))
    if not (len(names) == len(svec) == len(tvec)):
        raise EmbedError("ext needs one s and one t per free variable")
    neqs = frozenset(neq(s, t) for s, t in zip(svec, tvec))
    return _ext(a, dict(zip(names, svec)), dict(zip(names, tvec)), neqs)


def _ext(a, sm: Dict, tm: Dict, neqs: frozenset) -> Derivation:
    as_, at = subst_free(a, sm), subst_free(a, tm)
    nas = negate(as_)
    end = neqs | {nas, at}
    if is_delta0(a):
        return axiom(end)
    top = no(*end)
    if isinstance(a, (And, Or)):
        parts = (a.left, a.right)
        if isinstance(a, And):
            # prove A(t) from the two halves, each closing not A(s) by an or
            kids = []
            for i, ai in enumerate(parts):
                sub = _ext(ai, sm, tm, neqs)
                aii = subst_free(ai, tm)
                kids.append(_node(Rule.OR1 if i else Rule.OR0, nas, neqs | {aii},
                                  no(*(neqs | {aii, nas})), [sub]))
            return _node(Rule.AND, at, neqs | {nas}, top, kids)
        kids = []
        for i, ai in enumerate(parts):
            sub = _ext(ai, sm, tm, neqs)
            nai = negate(subst_free(ai, sm))
            kids.append(_node(Rule.OR1 if i else Rule.OR0, at, neqs | {nai},
                              no(*(neqs | {nai, at})), [sub]))
        return _node(Rule.AND, nas, neqs | {at}, top, kids)
    body = a.body
    if isinstance(a, (UForall, UExists)):
        # the universal side is A(t) for forall, not A(s) for exists
        univ, exi = (at, nas) if isinstance(a, UForall) else (nas, at)

        def branch(r):
            sub = _ext(instantiate(body, r), sm, tm, neqs)
            m = decompose(univ)(r)
            side = neqs | {m}
            return _node(Rule.EX, exi, side, no(*(side | {exi})), [sub], witness=r)

        return _node(Rule.ALL, univ, neqs | {exi}, top, branch=Branch(branch, "ext"))
    # bounded quantifiers
    univ, exi = (at, nas) if isinstance(a, BForall) else (nas, at)
    u_univ, u_exi = decompose(univ), decompose(exi)

    def bbranch(r):
        m = u_univ(r)              # r notin bound or F
        inner = u_exi(r)           # r in bound' and G
        side = neqs | {m}
        f = instantiate(body, r)
        atom = MemAtom(True, r, a.bound)
        # the atom premise is oriented like the universal side; the matrix premise never flips
        atom_sub = _ext(negate(atom) if univ is at else atom, sm, tm, neqs)
        mat_sub = _ext(f, sm, tm, neqs)
        e0 = neqs | {inner.left}
        k0 = _node(Rule.OR0, m, e0, no(*(e0 | {m})), [atom_sub])
        e1 = neqs | {inner.right}
        k1 = _node(Rule.OR1, m, e1, no(*(e1 | {m})), [mat_sub])
        conj = _node(Rule.AND, inner, side, no(*(side | {inner})), [k0, k1])
        return _node(Rule.BEX, exi, side, no(*(side | {exi})), [conj], witness=r)

    return _node(Rule.BALL, univ, neqs | {exi}, top, branch=Branch(bbranch, "ext"))


# -- set induction ----------------------------------------------------------------------

def ind(body) -> Derivation:
    """A derivation of not A or forall x F(x), A the induction hypothesis for F."""
    A = ind_hypothesis(body)
    nA = negate(A)
    wA = O.OmegaPow(formula_rank(A))
    allF = UForall(body)
    top = O.natural_sum(wA, wA)
    step = _node(Rule.ALL, allF, {nA}, top, branch=Branch(lambda s: _ind_step(body, nA, wA, s), "ind"))
    return join_or(step, Or(nA, allF))


def _ind_step(body, nA, wA, s) -> Derivation:
    """f(F, s): a derivation of not A, F(s), by recursion on |s|."""
    fs = instantiate(body, s)
    rs = set_rank(s)
    base = O.natural_sum(wA, O.OmegaPow(rs))
    bs = BForall(s, body)
    side = frozenset([nA, fs])

    def g(t):
        m = Or(MemAtom(False, t, s), instantiate(body, t))
        if O.lt(set_rank(t), rs):
            sub = _ind_step(body, nA, wA, t)
            return _or(m, side, wkn(side, sub), 1, O.succ(base))
        leaf = axiom(side | {m.left})
        return _or(m, side, leaf, 0)

    k0 = _node(Rule.BALL, bs, side, O.succ(base, 2), branch=Branch(g, "ind"))
    k1 = wkn({nA}, lem(fs))
    conj = And(bs, negate(fs))
    d = _node(Rule.AND, conj, side, O.succ(base, 3), [k0, k1])
    return _node(Rule.EX, nA, side, O.natural_sum(wA, O.OmegaPow(O.succ(rs))), [d], witness=s)


# -- the existence axioms ---------------------------------------------------------------

def _ex_axiom(formula, witness) -> Derivation:
    leaf = axiom({instantiate(formula.body, witness)})
    return _node(Rule.EX, formula, (), O.ONE, [leaf], witness=witness)


def pair(s, t) -> Derivation:
    return _ex_axiom(pair_formula(s, t), PairT(s, t))


def union(s) -> Derivation:
    return _ex_axiom(union_formula(s), UnionT(s))


def inf() -> Derivation:
    return _ex_axiom(inf_formula(), C_OMEGA)


def sep(s, body) -> Derivation:
    return _ex_axiom(sep_formula(s, body), SepT(s, body))


def col(s, body2) -> Derivation:
    """not P or exists z P^z with P = (forall x in s) exists y G(x, y)."""
    p = col_premise(s, body2)
    base = lem(p)
    ref = reflect_formula(p)
    r = _node(Rule.SIGMA_REF, ref, {negate(p)}, O.succ(base.length), [base], minor=p)
    return join_or(r, Or(negate(p), ref))


def ext_axiom(a, b, body) -> Derivation:
    """The extensionality instance (a != b or not B(a)) or B(b)."""
    name = "·e"
    d = ext(instantiate(body, FVar(name)), [a], [b], [name])
    x = Or(Or(neq(a, b), negate(instantiate(body, a))), instantiate(body, b))
    return join_or(join_or(d, x.left), x)


# -- proofs -------------------------------------------------------------------------------

def embed_axiom(p: FinProof, subst: Dict) -> Derivation:
    args = {k: subst_free(v, subst) for k, v in p.args.items()}
    sch = p.schema
    if sch == "logical":
        core = lem(args["formula"])
    elif sch == "ext":
        core = ext_axiom(args["a"], args["b"], args["body"])
    elif sch == "ind":
        core = ind(args["body"])
    elif sch == "pair":
        core = pair(args["a"], args["b"])
    elif sch == "union":
        core = union(args["a"])
    elif sch == "inf":
        core = inf()
    elif sch == "sep":
        core = sep(args["a"], args["body"])
    elif sch == "col":
        core = col(args["a"], args["body"])
    else:
        raise EmbedError(f"unknown schema {sch!r}")
    end = frozenset(subst_free(f, subst) for f in p.end)
    return wkn(end, core)


def axiom_embed(schema: str, **inst) -> Derivation:
    """Embed a closed axiom instance given by keyword arguments."""
    for k, v in inst.items():
        if k not in ("body", "formula") and not _closed_term(v):
            raise EmbedError(f"{k} must be a closed term")
    return embed_axiom(mk_axiom(schema, **inst), {})


def static_rank(p: FinProof):
    """Rank of the embedding of p: Omega + m with m read off the cuts."""
    if p.rule == "axiom":
        return O.Omega
    r = O.Omega
    for c in p.children:
        r = O.omax(r, static_rank(c))
    if p.rule == "cut":
        closed = subst_free(p.principal, {v: C_EMPTY for v in free_vars(p.principal)})
        r = O.omax(r, O.succ(formula_rank(closed)))
    return r


def quantifier_length(k: int):
    """Omega * phi0^k(omega), the recorded length of a forall with k quantifier inferences."""
    return O.omega_mul_left(O.phi0_iterate(k, O.OMEGA_FIN))


def embedding_bound(p: FinProof):
    """Strict length bound: Omega * w^w without forall inferences, else Omega * phi0^(k+1)(w)."""
    k = count_k(p)
    if k == 0:
        return O.omega_mul_left(O.OmegaPow(O.OMEGA_FIN))
    return O.omega_mul_left(O.phi0_iterate(k + 1, O.OMEGA_FIN))


def audit_embedding(p: FinProof, w: Derivation, battery="std", depth: int = 6) -> List[Tuple[tuple, str]]:
    """Root bounds of an embedding plus the uniform-rank condition below it."""
    out = []
    bound = embedding_bound(p)
    if not O.lt(w.length, bound):
        out.append(((), f"length {O.to_text(w.length)} not below {O.to_text(bound)}"))
    if omega_offset(w.rank) is None:
        out.append(((), f"rank {O.to_text(w.rank)} is not of the form W + m"))
    return out + check_uniform_ranks(w, battery, depth)


def embed_proof(p: FinProof, subst: Optional[Dict] = None, check: bool = True) -> Derivation:
    """Embed p under subst, a map from its free variables to closed terms."""
    if check:
        rep = check_fin(p)
        if not rep.ok:
            addr, msg = rep.violations[0]
            raise EmbedError(f"proof does not check at /{'/'.join(map(str, addr))}: {msg}")
    subst = dict(subst or {})
    for name, t in subst.items():
        if not _closed_term(t):
            raise EmbedError(f"substitution for {name} is not a closed term")
    need = set()
    for f in p.end:
        need |= free_vars(f)
    missing = need - set(subst)
    if missing:
        raise EmbedError(f"no term given for free variable(s) {', '.join(sorted(missing))}")
    return _embed(p, subst)


def _closed_term(t) -> bool:
    return isinstance(t, (Const, PairT, UnionT, SepT)) and is_closed(t)


def _fill(p: FinProof, subst: Dict) -> Dict:
    """Extend subst with c_empty for variables that are dead below this node."""
    extra = set()
    for f in p.end:
        extra |= free_vars(f)
    if p.rule == "cut":
        extra |= free_vars(p.principal)
    if p.witness is not None:
        extra |= free_vars(p.witness)
    out = dict(subst)
    for v in extra - set(out):
        out[v] = C_EMPTY
    return out


def _embed(p: FinProof, subst: Dict) -> Derivation:
    subst = _fill(p, subst)
    if p.rule == "axiom":
        # the builders have rank 0; the recorded bound is raised to Omega so
        # every embedded proof has a rank of the form Omega+m
        return embed_axiom(p, subst).relabel(rank=O.Omega)
    principal = subst_free(p.principal, subst)
    rank = static_rank(p)
    if p.rule in ("ball", "all"):
        k = count_k(p)
        length = quantifier_length(k)
        child = p.children[0]
        eigen = p.eigen
        rule = Rule.BALL if p.rule == "ball" else Rule.ALL
        side = _side_of(p, subst)

        def branch(t, child=child, subst=subst, eigen=eigen):
            return _embed(child, {**subst, eigen: t})

        return Derivation(rule, principal, side, length, rank, branch=Branch(branch, p.rule))
    kids = [_embed(c, subst) for c in p.children]
    length = O.succ(O.omax(*(k.length for k in kids)))
    side = _side_of(p, subst)
    if p.rule == "cut":
        return Derivation(Rule.CUT, principal, side, length, rank, kids)
    if p.rule == "and":
        return Derivation(Rule.AND, principal, side, length, rank, kids)
    if p.rule == "or":
        return Derivation(Rule.OR1 if p.pick else Rule.OR0, principal, side, length, rank, kids)
    witness = subst_free(p.witness, subst)
    rule = Rule.BEX if p.rule == "bex" else Rule.EX
    return Derivation(rule, principal, side, length, rank, kids, witness=witness)


def _side_of(p: FinProof, subst: Dict) -> frozenset:
    """Gamma of the inference, chosen before substitution so premises line up."""
    gamma = p.end
    if p.rule != "cut":
        minor = minor_of(p, 0)
        low = p.end - {p.principal}
        if p.children[0].end == low | {minor}:
            gamma = low
    return frozenset(subst_free(f, subst) for f in gamma)


def check_uniform_ranks(w: Derivation, battery="std", depth: int = 6) -> List[Tuple[tuple, str]]:
    """Forall nodes must give every sampled premise the same rank bound."""
    battery = get_battery(battery)
    out = []
    level = [((), w)]
    for d in range(depth):
        nxt = []
        for addr, node in level:
            if node.rule in BRANCHING:
                kids = [(x, node.child(x)) for x in battery]
                if len({O.to_text(k.rank) for _, k in kids}) > 1:
                    out.append((addr, "premise ranks are not uniform over the battery"))
            else:
                kids = [(i, node.kid(i)) for i in range(node.arity)]
            if d + 1 < depth:
                nxt += [(addr + (x,), k) for x, k in kids]
        level = nxt
    return out
