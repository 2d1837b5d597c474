"""Hereditarily finite sets plus a distinguished omega, and truth evaluation.

Sets are canonical: a FinSet holds a frozenset of elements and prints its
elements sorted by their own printed form, so equality, hashing and text are
all deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Optional, Union

from .ord import Nat, OMEGA_FIN, OrdNotation, natural_sum, omax, ZERO


class EvaluationError(ValueError):
    pass


class ComplexityError(ValueError):
    pass


@dataclass(frozen=True)
class FinSet:
    elements: frozenset = frozenset()

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash(self.elements)
            object.__setattr__(self, "_h", h)
        return h

    def __iter__(self):
        return iter(sorted(self.elements, key=lambda e: (len(set_text(e)), set_text(e))))

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return set_text(self)


@dataclass(frozen=True)
class _OmegaSetType:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_OmegaSetType, ())

    def __repr__(self):
        return "omega"


OmegaSet = _OmegaSetType()
HFSet = Union[FinSet, _OmegaSetType]
EMPTY = FinSet()


def hf(*elements: HFSet) -> FinSet:
    return FinSet(frozenset(elements))


@lru_cache(maxsize=None)
def nat_set(n: int) -> FinSet:
    """The von Neumann natural n = {0, ..., n-1}."""
    out = EMPTY
    for _ in range(n):
        out = FinSet(out.elements | {out})
    return out


@lru_cache(maxsize=1 << 16)
def is_nat(x: HFSet) -> bool:
    return isinstance(x, FinSet) and x == nat_set(len(x.elements))


def member(x: HFSet, y: HFSet) -> bool:
    if y is OmegaSet:
        return is_nat(x)
    return x in y.elements


@lru_cache(maxsize=1 << 16)
def set_text(s: HFSet) -> str:
    if s is OmegaSet:
        return "omega"
    # shortlex on the printed forms keeps {} ahead of {{}}
    return "{" + ",".join(sorted((set_text(e) for e in s.elements), key=lambda x: (len(x), x))) + "}"


@lru_cache(maxsize=1 << 16)
def hf_rank(s: HFSet) -> OrdNotation:
    """Set-theoretic rank; omega has rank w, a set containing omega w+1 and so on."""
    if s is OmegaSet:
        return OMEGA_FIN
    if not s.elements:
        return ZERO
    return natural_sum(omax(*(hf_rank(e) for e in s.elements)), Nat(1))


def parse_set(text: str) -> HFSet:
    from .syntax import parse_term, Const

    t = parse_term(text)
    if not isinstance(t, Const):
        raise EvaluationError(f"not a set literal: {text!r}")
    return t.value


# -- universes -------------------------------------------------------------

@lru_cache(maxsize=None)
def vk(k: int) -> tuple:
    """All sets of rank < k, in canonical order."""
    level = [EMPTY] if k >= 1 else []
    for _ in range(k - 1):
        base = level
        level = [FinSet(frozenset(c)) for r in range(len(base) + 1) for c in combinations(base, r)]
    return tuple(sorted(level, key=lambda e: (len(set_text(e)), set_text(e))))


@dataclass(frozen=True)
class Universe:
    rank_bound: int = 4
    omega_fuel: int = 8
    # off by default: unbounded quantifiers range over V_k only
    with_omega: bool = False
    members: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.rank_bound < 0 or self.omega_fuel < 0:
            raise ValueError("universe parameters must be natural numbers")
        ms = vk(self.rank_bound)
        if self.with_omega:
            ms = ms + (OmegaSet,)
        object.__setattr__(self, "members", ms)


# -- three-valued verdicts ------------------------------------------------

class Verdict(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __invert__(self):
        if self is Verdict.TRUE:
            return Verdict.FALSE
        if self is Verdict.FALSE:
            return Verdict.TRUE
        return self


T, F, U = Verdict.TRUE, Verdict.FALSE, Verdict.UNKNOWN


def v_and(vs: Iterable[Verdict]) -> Verdict:
    out = T
    for v in vs:
        if v is F:
            return F
        if v is U:
            out = U
    return out


def v_or(vs: Iterable[Verdict]) -> Verdict:
    out = F
    for v in vs:
        if v is T:
            return T
        if v is U:
            out = U
    return out


def _of(b: bool) -> Verdict:
    return T if b else F


# -- evaluation ------------------------------------------------------------

def ev_term(t, env: tuple = (), fuel: int = 8) -> HFSet:
    from . import syntax as sx

    if isinstance(t, sx.Const):
        return t.value
    if isinstance(t, sx.BVar):
        if t.index >= len(env):
            raise EvaluationError("dangling bound variable")
        return env[-1 - t.index]
    if isinstance(t, sx.PairT):
        return hf(ev_term(t.left, env, fuel), ev_term(t.right, env, fuel))
    if isinstance(t, sx.UnionT):
        return _union(ev_term(t.inner, env, fuel))
    if isinstance(t, sx.SepT):
        base = ev_term(t.base, env, fuel)
        if base is OmegaSet:
            raise EvaluationError("comprehension over omega is unsupported")
        keep = []
        for e in base.elements:
            v = _eval(t.body, (e,), None, fuel)
            if v is U:
                raise EvaluationError(f"undecided comprehension instance at {set_text(e)}")
            if v is T:
                keep.append(e)
        return FinSet(frozenset(keep))
    if isinstance(t, sx.FVar):
        raise EvaluationError(f"free variable {t.name} has no value")
    raise EvaluationError(f"not a term: {t!r}")


def _union(s: HFSet) -> HFSet:
    if s is OmegaSet:
        return OmegaSet
    out = set()
    has_omega = False
    for e in s.elements:
        if e is OmegaSet:
            has_omega = True
        else:
            out |= e.elements
    if has_omega:
        if all(is_nat(x) for x in out):
            return OmegaSet
        raise EvaluationError("union of omega with non-naturals is not representable")
    return FinSet(frozenset(out))


def _bounded(s: HFSet, fuel: int):
    """Elements to range over and whether that range is exhaustive."""
    if s is OmegaSet:
        return [nat_set(n) for n in range(fuel)], False
    return list(s.elements), True


def _eval(f, env: tuple, u: Optional[Universe], fuel: int) -> Verdict:
    from . import syntax as sx

    if isinstance(f, sx.MemAtom):
        b = member(ev_term(f.left, env, fuel), ev_term(f.right, env, fuel))
        return _of(b if f.positive else not b)
    if isinstance(f, sx.And):
        return v_and(_eval(g, env, u, fuel) for g in (f.left, f.right))
    if isinstance(f, sx.Or):
        return v_or(_eval(g, env, u, fuel) for g in (f.left, f.right))
    if isinstance(f, (sx.BForall, sx.BExists)):
        xs, complete = _bounded(ev_term(f.bound, env, fuel), fuel)
        vs = (_eval(f.body, env + (x,), u, fuel) for x in xs)
        if isinstance(f, sx.BForall):
            v = v_and(vs)
            return v if complete or v is F else U
        v = v_or(vs)
        return v if complete or v is T else U
    if isinstance(f, (sx.UForall, sx.UExists)):
        if u is None:
            raise ComplexityError("unbounded quantifier in a Delta0 evaluation")
        vs = (_eval(f.body, env + (x,), u, fuel) for x in u.members)
        return v_and(vs) if isinstance(f, sx.UForall) else v_or(vs)
    raise EvaluationError(f"not a formula: {f!r}")


def truth_delta0(f, u: Optional[Universe] = None) -> Verdict:
    from .syntax import is_closed, is_delta0

    if not is_delta0(f):
        raise ComplexityError("formula is not Delta0")
    if not is_closed(f):
        raise EvaluationError("formula is not closed")
    fuel = u.omega_fuel if u is not None else 8
    return _eval(f, (), None, fuel)


@dataclass(frozen=True)
class Level:
    kind: str  # "sigma" or "pi"
    n: int

    def __str__(self):
        return f"{'Sigma' if self.kind == 'sigma' else 'Pi'}{self.n}"


def Sigma(n: int) -> Level:
    return Level("sigma", n)


def Pi(n: int) -> Level:
    return Level("pi", n)


def truth_level(f, level: Level, u: Universe) -> Verdict:
    """Truth of a closed formula of complexity at most `level`, over u.members."""
    from .syntax import is_closed, levels

    s, p = levels(f)
    have = s if level.kind == "sigma" else p
    if have > level.n:
        raise ComplexityError(f"formula is not {level}")
    if not is_closed(f):
        raise EvaluationError("formula is not closed")
    return _eval(f, (), u, u.omega_fuel)


def truth_any(f, u: Universe) -> Verdict:
    """Evaluate at whatever level the formula has."""
    return _eval(f, (), u, u.omega_fuel)
