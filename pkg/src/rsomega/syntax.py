"""Terms and negation-normal formulas of the infinitary language.

Bound variables are de Bruijn indices (BVar), so alpha-equivalent formulas are
equal as values. Free variables (FVar) only occur in the finitary calculus.
Compound terms (pair, union, separation) are always closed; variables occur
bare, as atom arguments and quantifier bounds.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Optional, Union

from . import ord as O
from .hfset import (
    EMPTY, OmegaSet, FinSet, HFSet, ev_term, hf_rank, set_text,
)


class FormulaError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{line}:{col}: {msg}")
        self.pos = pos


def _cached_hash(self):
    h = self.__dict__.get("_h")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, f.name) for f in fields(self)))
        object.__setattr__(self, "_h", h)
    return h


def _node(cls):
    cls = dataclass(frozen=True)(cls)
    cls.__hash__ = _cached_hash
    cls.__repr__ = lambda self: serialize(self)
    return cls


# -- terms -------------------------------------------------------------------

@_node
class Const:
    value: HFSet


@_node
class PairT:
    left: "Term"
    right: "Term"


@_node
class UnionT:
    inner: "Term"


@_node
class SepT:
    base: "Term"
    body: "Formula"  # one bound slot: the separated variable


@_node
class BVar:
    index: int


@_node
class FVar:
    name: str


Term = Union[Const, PairT, UnionT, SepT, BVar, FVar]

C_EMPTY = Const(EMPTY)
C_OMEGA = Const(OmegaSet)


def c(value: HFSet) -> Const:
    return Const(value)


# -- formulas ----------------------------------------------------------------

@_node
class MemAtom:
    positive: bool
    left: Term
    right: Term


@_node
class And:
    left: "Formula"
    right: "Formula"


@_node
class Or:
    left: "Formula"
    right: "Formula"


@_node
class BForall:
    bound: Term
    body: "Formula"


@_node
class BExists:
    bound: Term
    body: "Formula"


@_node
class UForall:
    body: "Formula"


@_node
class UExists:
    body: "Formula"


Formula = Union[MemAtom, And, Or, BForall, BExists, UForall, UExists]
Sequent = FrozenSet

V0 = BVar(0)


def mem(a: Term, b: Term) -> MemAtom:
    return MemAtom(True, a, b)


def nmem(a: Term, b: Term) -> MemAtom:
    return MemAtom(False, a, b)


def _shift(t: Term) -> Term:
    return BVar(t.index + 1) if isinstance(t, BVar) else t


def equals(s: Term, t: Term) -> Formula:
    """s = t as (forall x in s) x in t and (forall x in t) x in s."""
    return And(BForall(s, mem(V0, _shift(t))), BForall(t, mem(V0, _shift(s))))


def imp(a: Formula, b: Formula) -> Formula:
    return Or(negate(a), b)


def seq(*fs: Formula) -> Sequent:
    return frozenset(fs)


@lru_cache(maxsize=1 << 16)
def negate(f: Formula) -> Formula:
    if isinstance(f, MemAtom):
        return MemAtom(not f.positive, f.left, f.right)
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    if isinstance(f, BForall):
        return BExists(f.bound, negate(f.body))
    if isinstance(f, BExists):
        return BForall(f.bound, negate(f.body))
    if isinstance(f, UForall):
        return UExists(negate(f.body))
    if isinstance(f, UExists):
        return UForall(negate(f.body))
    raise FormulaError(f"not a formula: {f!r}")


# -- substitution --------------------------------------------------------------

def _term_open(t: Term) -> bool:
    return isinstance(t, (BVar, FVar))


def instantiate(body: Formula, t: Term) -> Formula:
    """Fill the outermost slot of a quantifier body with the term t."""
    if isinstance(t, BVar):
        raise FormulaError("only binder-free terms can be substituted")
    return _inst(body, 0, t)


def _inst_term(u: Term, depth: int, t: Term) -> Term:
    if isinstance(u, BVar):
        if u.index == depth:
            return t
        if u.index > depth:
            return BVar(u.index - 1)
    return u


def _inst(f: Formula, depth: int, t: Term) -> Formula:
    if isinstance(f, MemAtom):
        return MemAtom(f.positive, _inst_term(f.left, depth, t), _inst_term(f.right, depth, t))
    if isinstance(f, And):
        return And(_inst(f.left, depth, t), _inst(f.right, depth, t))
    if isinstance(f, Or):
        return Or(_inst(f.left, depth, t), _inst(f.right, depth, t))
    if isinstance(f, BForall):
        return BForall(_inst_term(f.bound, depth, t), _inst(f.body, depth + 1, t))
    if isinstance(f, BExists):
        return BExists(_inst_term(f.bound, depth, t), _inst(f.body, depth + 1, t))
    if isinstance(f, UForall):
        return UForall(_inst(f.body, depth + 1, t))
    if isinstance(f, UExists):
        return UExists(_inst(f.body, depth + 1, t))
    raise FormulaError(f"not a formula: {f!r}")


def subst_free(f, mapping: Dict[str, Term]):
    """Replace free variables by binder-free terms; works on formulas and terms."""
    if not mapping:
        return f
    if isinstance(f, FVar):
        return mapping.get(f.name, f)
    if isinstance(f, (Const, BVar, PairT, UnionT, SepT)):
        return f
    if isinstance(f, MemAtom):
        return MemAtom(f.positive, subst_free(f.left, mapping), subst_free(f.right, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(subst_free(f.left, mapping), subst_free(f.right, mapping))
    if isinstance(f, (BForall, BExists)):
        return type(f)(subst_free(f.bound, mapping), subst_free(f.body, mapping))
    if isinstance(f, (UForall, UExists)):
        return type(f)(subst_free(f.body, mapping))
    raise FormulaError(f"not a formula: {f!r}")


def free_vars(f) -> FrozenSet[str]:
    if isinstance(f, FVar):
        return frozenset([f.name])
    if isinstance(f, (Const, BVar, PairT, UnionT, SepT)):
        return frozenset()
    if isinstance(f, MemAtom):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (BForall, BExists)):
        return free_vars(f.bound) | free_vars(f.body)
    if isinstance(f, (UForall, UExists)):
        return free_vars(f.body)
    raise FormulaError(f"not a formula or term: {f!r}")


def _max_dangling(f, depth: int = 0) -> int:
    """How far bound-variable references reach past the top (0 = none)."""
    if isinstance(f, BVar):
        return max(0, f.index - depth + 1)
    if isinstance(f, (Const, FVar, PairT, UnionT, SepT)):
        return 0
    if isinstance(f, MemAtom):
        return max(_max_dangling(f.left, depth), _max_dangling(f.right, depth))
    if isinstance(f, (And, Or)):
        return max(_max_dangling(f.left, depth), _max_dangling(f.right, depth))
    if isinstance(f, (BForall, BExists)):
        return max(_max_dangling(f.bound, depth), _max_dangling(f.body, depth + 1))
    if isinstance(f, (UForall, UExists)):
        return _max_dangling(f.body, depth + 1)
    raise FormulaError(f"not a formula or term: {f!r}")


@lru_cache(maxsize=1 << 16)
def is_closed(f) -> bool:
    return _max_dangling(f) == 0 and not free_vars(f)


# -- classification ------------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def is_delta0(f: Formula) -> bool:
    if isinstance(f, MemAtom):
        return True
    if isinstance(f, (And, Or)):
        return is_delta0(f.left) and is_delta0(f.right)
    if isinstance(f, (BForall, BExists)):
        return is_delta0(f.body)
    return False


@lru_cache(maxsize=1 << 16)
def is_sigma(f: Formula) -> bool:
    """Sigma in the KP sense: no unbounded universal quantifier."""
    if isinstance(f, MemAtom):
        return True
    if isinstance(f, (And, Or)):
        return is_sigma(f.left) and is_sigma(f.right)
    if isinstance(f, (BForall, BExists, UExists)):
        return is_sigma(f.body)
    return False


@lru_cache(maxsize=1 << 16)
def levels(f: Formula):
    """Least (n, m) with f syntactically in Sigma_n and in Pi_n'."""
    if is_delta0(f):
        return 0, 0
    if isinstance(f, (And, Or)):
        sl, pl = levels(f.left)
        sr, pr = levels(f.right)
        s, p = max(sl, sr), max(pl, pr)
    elif isinstance(f, BExists):
        s, _ = levels(f.body)
        p = s + 1
    elif isinstance(f, BForall):
        _, p = levels(f.body)
        s = p + 1
    elif isinstance(f, UExists):
        s = max(levels(f.body)[0], 1)
        p = s + 1
    elif isinstance(f, UForall):
        p = max(levels(f.body)[1], 1)
        s = p + 1
    else:
        raise FormulaError(f"not a formula: {f!r}")
    return min(s, p + 1), min(p, s + 1)


def relativize(f: Formula, bound: Term, depth: int = 0) -> Formula:
    """Replace unbounded quantifiers by quantifiers bounded by `bound`.

    `bound` may be a closed term or a BVar counted from the top of f.
    """
    b = BVar(bound.index + depth) if isinstance(bound, BVar) else bound
    if isinstance(f, MemAtom):
        return f
    if isinstance(f, (And, Or)):
        return type(f)(relativize(f.left, bound, depth), relativize(f.right, bound, depth))
    if isinstance(f, (BForall, BExists)):
        return type(f)(f.bound, relativize(f.body, bound, depth + 1))
    if isinstance(f, UForall):
        return BForall(b, relativize(f.body, bound, depth + 1))
    if isinstance(f, UExists):
        return BExists(b, relativize(f.body, bound, depth + 1))
    raise FormulaError(f"not a formula: {f!r}")


def reflect_formula(a: Formula) -> Formula:
    """The formula "exists z A^z"."""
    return UExists(relativize(a, V0))


# -- rank ----------------------------------------------------------------------

@lru_cache(maxsize=1 << 16)
def set_rank(t: Term) -> O.OrdNotation:
    """|t|: rank of the value; bare bound variables count as c_0."""
    if isinstance(t, BVar):
        return O.ZERO
    if isinstance(t, FVar):
        raise FormulaError(f"free variable {t.name} in a rank computation")
    return hf_rank(ev_term(t))


def term_rank(t: Term) -> O.OrdNotation:
    return O.omega_times(set_rank(t))


@lru_cache(maxsize=1 << 16)
def _rank(f: Formula) -> O.OrdNotation:
    if isinstance(f, MemAtom):
        return O.succ(O.omax(term_rank(f.left), term_rank(f.right)))
    if isinstance(f, (And, Or)):
        return O.succ(O.omax(_rank(f.left), _rank(f.right)))
    if isinstance(f, (BForall, BExists)):
        return O.omax(O.succ(term_rank(f.bound), 3), O.succ(_rank(f.body), 2))
    if isinstance(f, (UForall, UExists)):
        return O.omax(O.Omega, O.succ(_rank(f.body)))
    raise FormulaError(f"not a formula: {f!r}")


def formula_rank(f: Formula) -> O.OrdNotation:
    if not is_closed(f):
        raise FormulaError("rank needs a closed formula")
    return _rank(f)


def k_of(f: Formula) -> FrozenSet:
    if not is_closed(f):
        raise FormulaError("k needs a closed formula")
    out = set()
    _k(f, out)
    return frozenset(out)


def _k(f: Formula, out: set) -> None:
    if isinstance(f, MemAtom):
        out.add(set_rank(f.left))
        out.add(set_rank(f.right))
    elif isinstance(f, (And, Or)):
        _k(f.left, out)
        _k(f.right, out)
    elif isinstance(f, (BForall, BExists)):
        out.add(set_rank(f.bound))
        _k(f.body, out)
    else:
        out.add(O.Omega)
        _k(f.body, out)


def no(*fs: Formula) -> O.OrdNotation:
    """Natural sum of w^rank over the distinct formulas given."""
    out = O.ZERO
    for f in frozenset(fs):
        out = O.natural_sum(out, O.OmegaPow(formula_rank(f)))
    return out


# -- decomposition ---------------------------------------------------------------

@dataclass(frozen=True)
class Decomp:
    """A formula read as a conjunction or disjunction of its children.

    `binary` families are indexed by 0 and 1, the others by all terms.
    """
    conj: bool
    binary: bool
    child: Callable

    def __call__(self, i):
        return self.child(i)


ATOMIC = None


def decompose(f: Formula) -> Optional[Decomp]:
    if isinstance(f, MemAtom):
        return ATOMIC
    if isinstance(f, (And, Or)):
        parts = (f.left, f.right)

        def pick(i):
            if i not in (0, 1):
                raise FormulaError(f"index {i!r} out of range")
            return parts[i]
        return Decomp(isinstance(f, And), True, pick)
    if isinstance(f, BForall):
        return Decomp(True, False, lambda s: Or(nmem(s, f.bound), instantiate(f.body, s)))
    if isinstance(f, BExists):
        return Decomp(False, False, lambda s: And(mem(s, f.bound), instantiate(f.body, s)))
    if isinstance(f, UForall):
        return Decomp(True, False, lambda s: instantiate(f.body, s))
    if isinstance(f, UExists):
        return Decomp(False, False, lambda s: instantiate(f.body, s))
    raise FormulaError(f"not a formula: {f!r}")


def is_conjunctive(f: Formula) -> bool:
    return isinstance(f, (And, BForall, UForall))


# -- text ------------------------------------------------------------------------

def _bname(depth: int) -> str:
    return f"x{depth}"


def serialize(x, depth: int = 0) -> str:
    if isinstance(x, frozenset):
        return "(seq" + "".join(" " + s for s in sorted(serialize(f) for f in x)) + ")"
    if isinstance(x, Const):
        return set_text(x.value)
    if isinstance(x, BVar):
        return _bname(depth - 1 - x.index) if x.index < depth else f"?{x.index - depth}"
    if isinstance(x, FVar):
        return x.name
    if isinstance(x, PairT):
        return f"(pair {serialize(x.left, depth)} {serialize(x.right, depth)})"
    if isinstance(x, UnionT):
        return f"(union {serialize(x.inner, depth)})"
    if isinstance(x, SepT):
        return f"(sep {_bname(depth)} {serialize(x.base, depth)} {serialize(x.body, depth + 1)})"
    if isinstance(x, MemAtom):
        head = "mem" if x.positive else "nmem"
        return f"({head} {serialize(x.left, depth)} {serialize(x.right, depth)})"
    if isinstance(x, (And, Or)):
        head = "and" if isinstance(x, And) else "or"
        return f"({head} {serialize(x.left, depth)} {serialize(x.right, depth)})"
    if isinstance(x, (BForall, BExists)):
        head = "ball" if isinstance(x, BForall) else "bex"
        return f"({head} {_bname(depth)} {serialize(x.bound, depth)} {serialize(x.body, depth + 1)})"
    if isinstance(x, (UForall, UExists)):
        head = "all" if isinstance(x, UForall) else "ex"
        return f"({head} {_bname(depth)} {serialize(x.body, depth + 1)})"
    raise FormulaError(f"cannot serialize {x!r}")


@lru_cache(maxsize=1 << 16)
def sort_key(f) -> str:
    return serialize(f)


def sorted_seq(s: Sequent) -> list:
    return sorted(s, key=sort_key)


# S-expression reader. Nodes are (kind, value, pos) with kind in
# "atom", "list", "set".

_TOK = re.compile(r"\s*(?:(;[^\n]*)|([(){},])|([^\s(){},;]+))")
_RESERVED_FREE = re.compile(r"x\d+$")
KEYWORDS = {
    "mem", "nmem", "and", "or", "ball", "bex", "all", "forall", "ex", "exists",
    "pair", "union", "sep", "omega", "eq", "neq", "not", "imp", "seq",
}


def read_sexprs(text: str) -> list:
    pos = 0
    toks = []
    while True:
        m = _TOK.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError("unexpected character", pos, text)
            break
        pos = m.end()
        if m.group(1):
            continue
        if m.group(2):
            toks.append((m.group(2), m.start(2)))
        elif m.group(3):
            toks.append((m.group(3), m.start(3)))
    i = 0

    def node():
        nonlocal i
        if i >= len(toks):
            raise ParseError("unexpected end of input", len(text), text)
        tok, at = toks[i]
        i += 1
        if tok == "(":
            items = []
            while i < len(toks) and toks[i][0] != ")":
                items.append(node())
            if i >= len(toks):
                raise ParseError("unclosed '('", at, text)
            i += 1
            return ("list", items, at)
        if tok == "{":
            items = []
            while i < len(toks) and toks[i][0] != "}":
                items.append(node())
                if i < len(toks) and toks[i][0] == ",":
                    i += 1
            if i >= len(toks):
                raise ParseError("unclosed '{'", at, text)
            i += 1
            return ("set", items, at)
        if tok in ")},":
            raise ParseError(f"unexpected '{tok}'", at, text)
        return ("atom", tok, at)

    out = []
    while i < len(toks):
        out.append(node())
    return out


class _Reader:
    def __init__(self, text: str):
        self.text = text

    def err(self, msg, node):
        return ParseError(msg, node[2], self.text)

    def head(self, node):
        if node[0] != "list" or not node[1] or node[1][0][0] != "atom":
            return None
        return node[1][0][1]

    def args(self, node, n):
        items = node[1][1:]
        if len(items) != n:
            raise self.err(f"'{node[1][0][1]}' takes {n} arguments, got {len(items)}", node)
        return items

    def name(self, node):
        if node[0] != "atom" or node[1] in KEYWORDS:
            raise self.err("expected a variable name", node)
        return node[1]

    def set_value(self, node) -> HFSet:
        if node[0] == "atom" and node[1] == "omega":
            return OmegaSet
        if node[0] != "set":
            raise self.err("expected a set literal", node)
        return FinSet(frozenset(self.set_value(e) for e in node[1]))

    def term(self, node, scope: tuple) -> Term:
        kind, val, _ = node
        if kind == "set" or (kind == "atom" and val == "omega"):
            return Const(self.set_value(node))
        if kind == "atom":
            name = self.name(node)
            if name in scope:
                return BVar(scope[::-1].index(name))
            if _RESERVED_FREE.match(name):
                raise self.err(f"free variable name {name!r} is reserved for bound variables", node)
            return FVar(name)
        h = self.head(node)
        if h == "pair":
            a, b = self.args(node, 2)
            t = PairT(self.term(a, scope), self.term(b, scope))
        elif h == "union":
            (a,) = self.args(node, 1)
            t = UnionT(self.term(a, scope))
        elif h == "sep":
            x, base, body = self.args(node, 3)
            t = SepT(self.term(base, scope), self.formula(body, scope + (self.name(x),)))
            if _max_dangling(t.body) > 1 or free_vars(t.body):
                raise self.err("a separation matrix may only mention its own variable", node)
            if not is_delta0(t.body):
                raise self.err("a separation matrix must be Delta0", node)
        else:
            raise self.err("expected a term", node)
        if not is_closed(t):
            raise self.err("compound terms must be closed", node)
        return t

    def formula(self, node, scope: tuple) -> Formula:
        h = self.head(node)
        if h in ("mem", "nmem"):
            a, b = self.args(node, 2)
            return MemAtom(h == "mem", self.term(a, scope), self.term(b, scope))
        if h in ("eq", "neq"):
            a, b = self.args(node, 2)
            f = equals(self.term(a, scope), self.term(b, scope))
            return f if h == "eq" else negate(f)
        if h in ("and", "or", "imp"):
            items = node[1][1:]
            if len(items) < 2:
                raise self.err(f"'{h}' takes at least 2 arguments", node)
            fs = [self.formula(x, scope) for x in items]
            if h == "imp":
                if len(fs) != 2:
                    raise self.err("'imp' takes 2 arguments", node)
                return imp(*fs)
            out = fs[-1]
            for g in reversed(fs[:-1]):
                out = And(g, out) if h == "and" else Or(g, out)
            return out
        if h == "not":
            (a,) = self.args(node, 1)
            return negate(self.formula(a, scope))
        if h in ("ball", "bex"):
            x, t, body = self.args(node, 3)
            bound = self.term(t, scope)
            b = self.formula(body, scope + (self.name(x),))
            return BForall(bound, b) if h == "ball" else BExists(bound, b)
        if h in ("all", "forall", "ex", "exists"):
            x, body = self.args(node, 2)
            b = self.formula(body, scope + (self.name(x),))
            return UForall(b) if h in ("all", "forall") else UExists(b)
        raise self.err("expected a formula", node)

    def sequent(self, node, scope: tuple = ()) -> Sequent:
        if self.head(node) != "seq":
            raise self.err("expected (seq ...)", node)
        return frozenset(self.formula(x, scope) for x in node[1][1:])


def _one(text: str):
    nodes = read_sexprs(text)
    if len(nodes) != 1:
        raise ParseError(f"expected one expression, found {len(nodes)}", 0, text)
    return nodes[0]


def parse_formula(text: str) -> Formula:
    return _Reader(text).formula(_one(text), ())


def parse_term(text: str) -> Term:
    return _Reader(text).term(_one(text), ())


def parse_sequent(text: str) -> Sequent:
    return _Reader(text).sequent(_one(text))


def parse(text: str):
    """Parse a formula, term or sequent, deciding by the head symbol."""
    node = _one(text)
    r = _Reader(text)
    h = r.head(node)
    if h == "seq":
        return r.sequent(node)
    if h in ("pair", "union", "sep") or node[0] in ("set", "atom"):
        return r.term(node, ())
    return r.formula(node, ())
