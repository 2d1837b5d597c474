"""Infinitary derivations with lazily computed children.

A Derivation is one node of a (possibly infinitely branching) proof tree. Finite
children are stored as Derivations or as zero-argument thunks that are forced on
first access. Term-indexed rules (BAll, All) hold a Branch, a pure function from
closed terms to child derivations.

Length and rank are recorded bounds, as in a code <rule, A, Gamma, a, r, ...>;
nothing here recomputes a "true" length.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

from . import ord as O
from .hfset import EMPTY, OmegaSet, Universe, Verdict, hf, truth_delta0, vk
from .syntax import (
    And, BExists, BForall, Const, MemAtom, Or, PairT, SepT, UExists, UForall, UnionT,
    decompose, formula_rank, is_closed, is_delta0, is_sigma, mem, negate,
    reflect_formula, serialize, sorted_seq,
)


class MalformedDerivation(ValueError):
    pass


class Rule(str, Enum):
    AXIOM = "Axiom"
    AND = "And"
    OR0 = "Or0"
    OR1 = "Or1"
    BALL = "BAll"
    BEX = "BEx"
    ALL = "All"
    EX = "Ex"
    CUT = "Cut"
    SIGMA_REF = "SigmaRef"


FINITE_ARITY = {
    Rule.AXIOM: 0, Rule.AND: 2, Rule.CUT: 2,
    Rule.OR0: 1, Rule.OR1: 1, Rule.BEX: 1, Rule.EX: 1, Rule.SIGMA_REF: 1,
}
BRANCHING = (Rule.BALL, Rule.ALL)

# -- branch functions ----------------------------------------------------------

_calls = 0
_calls_lock = threading.Lock()


def branch_calls() -> int:
    return _calls


def reset_branch_calls() -> None:
    global _calls
    with _calls_lock:
        _calls = 0


_cache_default = False


def set_branch_cache(on: bool) -> None:
    """Default memoization for Branch objects created from now on."""
    global _cache_default
    _cache_default = bool(on)


class Branch:
    """A total, pure map from closed terms to derivations.

    Every invocation bumps a global counter so tests can observe laziness.
    Results are not memoized unless `cache` is set.
    """
    __slots__ = ("fn", "label", "_cache")

    def __init__(self, fn: Callable, label: str = "", cache: Optional[bool] = None):
        self.fn = fn
        self.label = label
        if cache is None:
            cache = _cache_default
        self._cache = {} if cache else None

    def __call__(self, s) -> "Derivation":
        global _calls
        with _calls_lock:
            _calls += 1
        if self._cache is not None:
            hit = self._cache.get(s)
            if hit is None:
                hit = self._cache[s] = self.fn(s)
            return hit
        return self.fn(s)

    def __repr__(self):
        return f"Branch({self.label})"


# -- nodes ---------------------------------------------------------------------

class Derivation:
    __slots__ = ("rule", "principal", "side", "length", "rank", "_kids", "branch",
                 "witness", "minor", "_end")

    def __init__(self, rule: Rule, principal, side: Iterable, length, rank,
                 kids: Sequence = (), branch: Optional[Branch] = None,
                 witness=None, minor=None):
        self.rule = Rule(rule)
        self.principal = principal
        self.side = frozenset(side)
        self.length = length
        self.rank = rank
        self._kids = list(kids)
        self.branch = branch
        self.witness = witness  # BEx/Ex: the term s of the minor formula
        self.minor = minor      # SigmaRef: the Sigma formula A of the premise
        if self.rule in (Rule.AXIOM, Rule.CUT):
            self._end = self.side
        else:
            self._end = self.side | {principal}

    @property
    def end(self) -> frozenset:
        return self._end

    @property
    def arity(self) -> int:
        return len(self._kids)

    def kid(self, i: int) -> "Derivation":
        k = self._kids[i]
        if not isinstance(k, Derivation):
            k = k()
            if not isinstance(k, Derivation):
                raise MalformedDerivation(f"child {i} of {self.rule.value} is not a derivation")
            self._kids[i] = k
        return k

    def child(self, x) -> "Derivation":
        """The direct subderivation at index/term x (no Empty handling)."""
        if self.rule in BRANCHING:
            return self.branch(x)
        return self.kid(x)

    def minor_formula(self, x=0):
        """The formula the premise at x adds to the side formulas."""
        p = self.principal
        r = self.rule
        if r is Rule.AND:
            return (p.left, p.right)[x]
        if r is Rule.OR0:
            return p.left
        if r is Rule.OR1:
            return p.right
        if r in (Rule.BEX, Rule.EX):
            return decompose(p)(self.witness)
        if r in BRANCHING:
            return decompose(p)(x)
        if r is Rule.CUT:
            return p if x == 0 else negate(p)
        if r is Rule.SIGMA_REF:
            return self.minor
        raise MalformedDerivation("axioms have no premises")

    def relabel(self, length=None, rank=None) -> "Derivation":
        return Derivation(self.rule, self.principal, self.side,
                          self.length if length is None else length,
                          self.rank if rank is None else rank,
                          self._kids, self.branch, self.witness, self.minor)

    def __repr__(self):
        return f"<{self.rule.value} {serialize(self.end)} a={O.to_text(self.length)} r={O.to_text(self.rank)}>"


def axiom(seq: Iterable) -> Derivation:
    return Derivation(Rule.AXIOM, None, seq, O.ZERO, O.ZERO)


class _Empty:
    """The empty set returned by navigation at addresses outside the tree."""

    def __repr__(self):
        return "Empty"

    def __bool__(self):
        return False


Empty = _Empty()


def navigate(w, sigma: Sequence = ()):
    for x in sigma:
        if w is Empty:
            return Empty
        r = w.rule
        if r in BRANCHING:
            if isinstance(x, (int, str)) or x is None:
                return Empty
            w = w.branch(x)
        elif isinstance(x, int) and not isinstance(x, bool) and 0 <= x < FINITE_ARITY[r]:
            w = w.kid(x)
        else:
            return Empty
    return w


@dataclass(frozen=True)
class NodeInfo:
    rule: Rule
    principal: object
    end_sequent: frozenset
    length_bound: object
    rank_bound: object

    def as_json(self) -> dict:
        return {
            "rule": self.rule.value,
            "principal": None if self.principal is None else serialize(self.principal),
            "end": [serialize(f) for f in sorted_seq(self.end_sequent)],
            "length": O.to_text(self.length_bound),
            "rank": O.to_text(self.rank_bound),
        }


def node_info(w: Derivation) -> NodeInfo:
    if not check_quasicode(w):
        raise MalformedDerivation(f"not a quasicode: {w!r}")
    return NodeInfo(w.rule, w.principal, w.end, w.length, w.rank)


_SHAPE = {
    Rule.AND: And, Rule.OR0: Or, Rule.OR1: Or, Rule.BALL: BForall, Rule.BEX: BExists,
    Rule.ALL: UForall, Rule.EX: UExists, Rule.SIGMA_REF: UExists,
}


def check_quasicode(w) -> bool:
    """Shape-only validation of a single node."""
    if not isinstance(w, Derivation):
        return False
    if not all(isinstance(f, (MemAtom, And, Or, BForall, BExists, UForall, UExists)) for f in w.side):
        return False
    if not (O.is_notation(w.length) and O.is_notation(w.rank)):
        return False
    r = w.rule
    if r is Rule.AXIOM:
        return w.principal is None and w.arity == 0 and w.branch is None
    if r in BRANCHING:
        if w.arity != 0 or not isinstance(w.branch, Branch):
            return False
    elif w.arity != FINITE_ARITY[r] or w.branch is not None:
        return False
    if r is Rule.CUT:
        return isinstance(w.principal, (MemAtom, And, Or, BForall, BExists, UForall, UExists))
    if not isinstance(w.principal, _SHAPE[r]):
        return False
    if r in (Rule.BEX, Rule.EX) and w.witness is None:
        return False
    if r is Rule.SIGMA_REF and w.minor is None:
        return False
    return True


# -- batteries -----------------------------------------------------------------

def _c(*xs):
    return Const(hf(*xs))


def standard_battery() -> Tuple:
    """Versioned test terms: V_3 constants, c_omega and a few composite terms."""
    e0 = EMPTY
    e1 = hf(e0)
    e2 = hf(e1)
    e3 = hf(e0, e1)
    consts = tuple(Const(s) for s in vk(3))
    comp = (
        PairT(Const(e0), Const(e1)),
        UnionT(Const(hf(e2))),
        PairT(PairT(Const(e0), Const(e0)), Const(e0)),
        UnionT(PairT(Const(e1), Const(e2))),
        SepT(Const(e3), mem(_bv0(), Const(e1))),
    )
    return consts + (Const(OmegaSet),) + comp


def small_battery() -> Tuple:
    return (Const(EMPTY), Const(hf(EMPTY)), Const(OmegaSet))


def _bv0():
    from .syntax import BVar
    return BVar(0)


BATTERIES = {"std": standard_battery, "small": small_battery}
BATTERY_VERSION = 1


def get_battery(name_or_terms) -> Tuple:
    if isinstance(name_or_terms, str):
        try:
            return BATTERIES[name_or_terms]()
        except KeyError:
            raise ValueError(f"unknown battery {name_or_terms!r}") from None
    out = tuple(name_or_terms)
    if not out:
        raise ValueError("battery must be nonempty")
    return out


def addr_text(addr: Sequence) -> str:
    parts = [str(x) if isinstance(x, int) else serialize(x) for x in addr]
    return "/" + "/".join(parts)


def child_addresses(w: Derivation, battery: Sequence):
    if w.rule in BRANCHING:
        return list(battery)
    return list(range(w.arity))


# -- bounded well-formedness -------------------------------------------------------

@dataclass
class WfReport:
    violations: List[Tuple[tuple, str]] = field(default_factory=list)
    undetermined: List[Tuple[tuple, str]] = field(default_factory=list)
    explored: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_json(self) -> dict:
        return {
            "ok": self.ok,
            "explored": self.explored,
            "violations": [{"address": addr_text(a), "message": m} for a, m in self.violations],
            "undetermined": [{"address": addr_text(a), "message": m} for a, m in self.undetermined],
        }


def check_node(w: Derivation, u: Universe, battery: Sequence) -> Tuple[List[str], List[str], list]:
    """Local conditions at one node. Returns (violations, undetermined, kids)."""
    bad, unk, kids = [], [], []
    if not check_quasicode(w):
        return ["not a quasicode"], [], []
    for f in w.end:
        if not is_closed(f):
            bad.append(f"open formula {serialize(f)} in end sequent")
    if bad:
        return bad, unk, []
    if w.rule is Rule.AXIOM:
        verdicts = [truth_delta0(f, u) for f in w.end if is_delta0(f)]
        if Verdict.TRUE not in verdicts:
            if Verdict.UNKNOWN in verdicts:
                unk.append("axiom truth undecided within omega fuel")
            else:
                bad.append("no true Delta0 formula")
        return bad, unk, []
    if w.rule is Rule.CUT:
        need = O.succ(formula_rank(w.principal))
        if not O.le(need, w.rank):
            bad.append("cut formula rank + 1 exceeds the rank bound")
    if w.rule is Rule.SIGMA_REF:
        if not is_sigma(w.minor):
            bad.append("reflected formula is not Sigma")
        elif w.principal != reflect_formula(w.minor):
            bad.append("principal is not the reflection of the premise formula")
        if not O.lt(O.Omega, w.length):
            bad.append("SigmaRef length must exceed Omega")
    for x in child_addresses(w, battery):
        try:
            k = w.child(x)
        except MalformedDerivation as e:
            bad.append(str(e))
            continue
        if not isinstance(k, Derivation):
            bad.append("child is not a derivation")
            continue
        want = w.side | {w.minor_formula(x)}
        if k.end != want:
            bad.append(f"child {_lbl(x)} end sequent mismatch")
        if not O.lt(k.length, w.length):
            bad.append(f"length not strictly below at child {_lbl(x)}")
        if not O.le(k.rank, w.rank):
            bad.append(f"child {_lbl(x)} rank above parent")
        kids.append((x, k))
    return bad, unk, kids


def _lbl(x) -> str:
    return str(x) if isinstance(x, int) else serialize(x)


def check_wf_bounded(w: Derivation, battery="std", depth_fuel: int = 6,
                     universe: Optional[Universe] = None, max_nodes: int = 200_000) -> WfReport:
    """Check every local condition to depth_fuel, sampling branches on the battery.

    A violation is definitive. An empty violation list only means none was
    found within the budget.
    """
    if depth_fuel < 1:
        raise ValueError("depth_fuel must be at least 1")
    battery = get_battery(battery)
    u = universe or Universe()
    rep = WfReport()
    stack = [((), w, depth_fuel)]
    while stack and rep.explored < max_nodes:
        addr, node, fuel = stack.pop()
        rep.explored += 1
        bad, unk, kids = check_node(node, u, battery)
        rep.violations += [(addr, m) for m in bad]
        rep.undetermined += [(addr, m) for m in unk]
        if fuel > 1:
            for x, k in reversed(kids):
                stack.append((addr + (x,), k, fuel - 1))
    return rep


def walk(w: Derivation, battery="std", depth: int = 6):
    """Yield (address, node) pairs breadth-first to the given depth."""
    battery = get_battery(battery)
    level = [((), w)]
    for d in range(depth):
        nxt = []
        for addr, node in level:
            yield addr, node
            if d + 1 < depth:
                for x in child_addresses(node, battery):
                    nxt.append((addr + (x,), node.child(x)))
        level = nxt


def dump(w: Derivation, battery="std", depth: int = 3) -> str:
    battery = get_battery(battery)
    lines = []

    def go(node, d, label):
        info = node_info(node)
        lines.append("  " * d + f"{label}{info.rule.value} a={O.to_text(info.length_bound)} "
                      f"r={O.to_text(info.rank_bound)} {serialize(info.end_sequent)}")
        if d + 1 < depth:
            for x in child_addresses(node, battery):
                go(node.child(x), d + 1, f"[{_lbl(x)}] ")

    go(w, 0, "")
    return "\n".join(lines)
