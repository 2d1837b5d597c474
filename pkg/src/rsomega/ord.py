"""Ordinal notations below and including epsilon_{Omega+1}.

Notations are built from natural constants, the atom Omega, sums, omega-powers
and epsilon terms. Sums need not be in Cantor normal form; comparison sorts
them first, so `+` on notations behaves like the natural (Hessenberg) sum.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import cmp_to_key, lru_cache
from typing import Optional, Tuple, Union


class OrdinalError(ValueError):
    pass


@dataclass(frozen=True)
class Nat:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise OrdinalError(f"Nat needs a natural number, got {self.n!r}")


@dataclass(frozen=True)
class _OmegaAtom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_OmegaAtom, ())

    def __repr__(self):
        return "Omega"


Omega = _OmegaAtom()


@dataclass(frozen=True)
class Sum:
    parts: tuple

    def __hash__(self):
        return self._h

    def __reduce__(self):
        # rebuild so the cached hash matches this process
        return (Sum, (self.parts,))

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise OrdinalError("Sum needs at least two parts")
        for p in self.parts:
            if isinstance(p, Sum) or not is_notation(p):
                raise OrdinalError(f"Sum part is not of omega-power shape: {p!r}")
        object.__setattr__(self, "_h", hash(("Sum", self.parts)))


@dataclass(frozen=True)
class OmegaPow:
    exponent: "OrdNotation"

    def __post_init__(self):
        # hashed once, comparison caches hit these constantly
        object.__setattr__(self, "_h", hash(("Pow", self.exponent)))

    def __hash__(self):
        return self._h

    def __reduce__(self):
        # rebuild so the cached hash matches this process
        return (OmegaPow, (self.exponent,))


@dataclass(frozen=True)
class Eps:
    index: "OrdNotation"

    def __post_init__(self):
        # hashed once, comparison caches hit these constantly
        object.__setattr__(self, "_h", hash(("Eps", self.index)))

    def __hash__(self):
        return self._h

    def __reduce__(self):
        # rebuild so the cached hash matches this process
        return (Eps, (self.index,))


OrdNotation = Union[Nat, _OmegaAtom, Sum, OmegaPow, Eps]


class Cmp(Enum):
    Less = "<"
    Equal = "="
    Greater = ">"

    def flip(self) -> "Cmp":
        if self is Cmp.Less:
            return Cmp.Greater
        if self is Cmp.Greater:
            return Cmp.Less
        return self


Less, Equal, Greater = Cmp.Less, Cmp.Equal, Cmp.Greater

ZERO = Nat(0)
ONE = Nat(1)
OMEGA_FIN = OmegaPow(Nat(1))  # the least infinite ordinal, w^(1)


def is_notation(a) -> bool:
    return isinstance(a, (Nat, Sum, OmegaPow, Eps)) or a is Omega


def validate(a) -> None:
    """Raise OrdinalError unless `a` is a well-shaped notation."""
    if isinstance(a, Nat) or a is Omega:
        return
    if isinstance(a, Sum):
        for p in a.parts:
            validate(p)
        return
    if isinstance(a, OmegaPow):
        validate(a.exponent)
        return
    if isinstance(a, Eps):
        validate(a.index)
        return
    raise OrdinalError(f"not an ordinal notation: {a!r}")


def identical(a: OrdNotation, b: OrdNotation) -> bool:
    """Structural identity: the same string of symbols."""
    return a == b


def size(a: OrdNotation) -> int:
    if isinstance(a, Nat) or a is Omega:
        return 1
    if isinstance(a, Sum):
        return 1 + sum(size(p) for p in a.parts)
    if isinstance(a, OmegaPow):
        return 1 + size(a.exponent)
    if isinstance(a, Eps):
        return 1 + size(a.index)
    raise OrdinalError(f"not an ordinal notation: {a!r}")


def contains_omega(a: OrdNotation) -> bool:
    if a is Omega:
        return True
    if isinstance(a, Sum):
        return any(contains_omega(p) for p in a.parts)
    if isinstance(a, OmegaPow):
        return contains_omega(a.exponent)
    if isinstance(a, Eps):
        return contains_omega(a.index)
    return False


# -- comparison ------------------------------------------------------------

def _parts(a: OrdNotation) -> tuple:
    return a.parts if isinstance(a, Sum) else (a,)


def _exponent(p: OrdNotation) -> OrdNotation:
    # the canonical omega-power reading of a single part
    if isinstance(p, OmegaPow):
        return p.exponent
    if p is Omega or isinstance(p, Eps):
        return p
    raise OrdinalError(f"no exponent for {p!r}")


@lru_cache(maxsize=1 << 16)
def _terms(a: OrdNotation) -> Tuple[Tuple[OrdNotation, int], ...]:
    """CNF of `a` as (exponent, coefficient) pairs, exponents strictly decreasing."""
    raw = []
    for p in _parts(a):
        if isinstance(p, Nat):
            if p.n:
                raw.append((ZERO, p.n))
        else:
            raw.append((_exponent(p), 1))
    raw.sort(key=cmp_to_key(lambda x, y: _cmp_int(y[0], x[0])))
    merged = []
    for e, c in raw:
        if merged and compare(merged[-1][0], e) is Equal:
            merged[-1] = (merged[-1][0], merged[-1][1] + c)
        else:
            merged.append((e, c))
    return tuple(merged)


_CMP_INT = {Less: -1, Equal: 0, Greater: 1}


def _cmp_int(a, b) -> int:
    return _CMP_INT[compare(a, b)]


def compare(a: OrdNotation, b: OrdNotation) -> Cmp:
    """Total order on notations, value equality reported as Equal."""
    if a is b:
        return Equal
    ta, tb = type(a), type(b)
    if ta is Nat and tb is Nat:
        return Less if a.n < b.n else Greater if a.n > b.n else Equal
    return _compare(a, b)


@lru_cache(maxsize=1 << 18)
def _compare(a: OrdNotation, b: OrdNotation) -> Cmp:
    if a is Omega and b is Omega:
        return Equal
    if isinstance(a, Eps) and isinstance(b, Eps):
        # never stated directly; indices decide
        return compare(a.index, b.index)
    if a is Omega and isinstance(b, Eps):
        return compare(b.index, Omega).flip()
    if isinstance(a, Eps) and b is Omega:
        return compare(a.index, Omega)
    if isinstance(a, Nat) and b is Omega:
        return Less
    if a is Omega and isinstance(b, Nat):
        return Greater
    # everything else goes through the CNF reading
    ta, tb = _terms(a), _terms(b)
    for (ea, ca), (eb, cb) in zip(ta, tb):
        c = compare(ea, eb)
        if c is not Equal:
            return c
        if ca != cb:
            return Less if ca < cb else Greater
    if len(ta) == len(tb):
        return Equal
    return Less if len(ta) < len(tb) else Greater


def lt(a, b) -> bool:
    return compare(a, b) is Less


def le(a, b) -> bool:
    return compare(a, b) is not Greater


def eq(a, b) -> bool:
    return compare(a, b) is Equal


def omax(*xs: OrdNotation) -> OrdNotation:
    best = xs[0]
    for x in xs[1:]:
        if compare(x, best) is Greater:
            best = x
    return best


def is_zero(a: OrdNotation) -> bool:
    return not _terms(a) if not isinstance(a, Nat) else a.n == 0


def finite_value(a: OrdNotation) -> Optional[int]:
    """The natural number denoted by `a`, or None when `a` is infinite."""
    total = 0
    for e, c in _terms(a):
        if not is_zero(e):
            return None
        total += c
    return total


# -- arithmetic ------------------------------------------------------------

def _from_parts(parts) -> OrdNotation:
    parts = [p for p in parts if not (isinstance(p, Nat) and p.n == 0)]
    if not parts:
        return ZERO
    if len(parts) == 1:
        return parts[0]
    return Sum(tuple(parts))


def plus(*xs: OrdNotation) -> OrdNotation:
    """Flattening constructor for raw sums; zero parts are dropped."""
    out = []
    for x in xs:
        out.extend(_parts(x))
    return _from_parts(out)


def _part_exponent(p: OrdNotation) -> OrdNotation:
    return ZERO if isinstance(p, Nat) else _exponent(p)


def natural_sum(a: OrdNotation, b: OrdNotation) -> OrdNotation:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    parts = [p for p in _parts(a) + _parts(b) if not (isinstance(p, Nat) and p.n == 0)]
    parts.sort(key=cmp_to_key(lambda x, y: _cmp_int(_part_exponent(y), _part_exponent(x))))
    merged = []
    for p in parts:
        if merged and isinstance(p, Nat) and isinstance(merged[-1], Nat):
            merged[-1] = Nat(merged[-1].n + p.n)
        else:
            merged.append(p)
    return _from_parts(merged)


def nsum(*xs: OrdNotation) -> OrdNotation:
    out = ZERO
    for x in xs:
        out = natural_sum(out, x)
    return out


def succ(a: OrdNotation, n: int = 1) -> OrdNotation:
    """a + n; for finite n this coincides with the natural sum."""
    return natural_sum(a, Nat(n))


def normalize_cnf(a: OrdNotation) -> OrdNotation:
    validate(a)
    parts = []
    for e, c in _terms(a):
        parts.extend([OmegaPow(e)] * c)
    return _from_parts(parts)


def _term_parts(e: OrdNotation, c: int) -> list:
    if is_zero(e):
        return [Nat(c)]
    if e is Omega or isinstance(e, Eps):
        return [e] * c
    return [OmegaPow(e)] * c


def ordinal_add(a: OrdNotation, b: OrdNotation) -> OrdNotation:
    """Ordinary (non-commutative) ordinal sum a + b."""
    tb = _terms(b)
    if not tb:
        return a
    lead = tb[0][0]
    keep = []
    for e, c in _terms(a):
        if compare(e, lead) is not Less:
            keep.append((e, c))
    out = keep + list(tb)
    if len(keep) and compare(keep[-1][0], lead) is Equal:
        out = keep[:-1] + [(lead, keep[-1][1] + tb[0][1])] + list(tb[1:])
    parts = []
    for e, c in out:
        parts.extend(_term_parts(e, c))
    return _from_parts(parts)


def omega_mul_left(a: OrdNotation) -> OrdNotation:
    """Omega * a, using Omega * w^c = w^(Omega + c) termwise."""
    parts = []
    for e, c in _terms(a):
        term = Omega if is_zero(e) else OmegaPow(ordinal_add(Omega, e))
        parts.extend([term] * c)
    return _from_parts(parts)


def omega_times(a: OrdNotation) -> OrdNotation:
    """w * a, used for term ranks; w * n is n copies of w^(1)."""
    parts = []
    for e, c in _terms(a):
        fv = finite_value(e)
        parts.extend([OmegaPow(Nat(fv + 1)) if fv is not None else OmegaPow(e)] * c)
    return _from_parts(parts)


def phi0_iterate(k: int, a: OrdNotation) -> OrdNotation:
    for _ in range(k):
        a = OmegaPow(a)
    return a


def e_tower(n: int) -> OrdNotation:
    a = Sum((Omega, Nat(1)))
    for _ in range(n):
        a = OmegaPow(a)
    return a


EPS_OMEGA_1 = Eps(Sum((Omega, Nat(1))))


def below_eps_omega_plus_1(a: OrdNotation, limit: int = 100_000):
    """(True, least n with a < e_n) when a < eps_{Omega+1}, else (False, None)."""
    if compare(a, EPS_OMEGA_1) is not Less:
        return False, None
    e = e_tower(0)
    for n in range(limit):
        if compare(a, e) is Less:
            return True, n
        e = OmegaPow(e)
    raise OrdinalError("e-tower search exceeded its limit")


# -- text syntax -----------------------------------------------------------

def to_text(a: OrdNotation) -> str:
    if isinstance(a, Nat):
        return str(a.n)
    if a is Omega:
        return "W"
    if isinstance(a, Sum):
        return " + ".join(to_text(p) for p in a.parts)
    if isinstance(a, OmegaPow):
        return f"w^({to_text(a.exponent)})"
    if isinstance(a, Eps):
        return f"e({to_text(a.index)})"
    raise OrdinalError(f"not an ordinal notation: {a!r}")


_TOKEN = re.compile(r"\s*(?:(\d+)|(w\^\()|(e\()|(W)|(w)|(\()|(\))|(\+))")


def parse_ord(text: str) -> OrdNotation:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise OrdinalError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        kind = m.lastindex
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append((0, None, len(text)))
    i = 0

    def expect_close():
        nonlocal i
        if toks[i][0] != 7:
            raise OrdinalError(f"expected ')' at {toks[i][2]}")
        i += 1

    def atom():
        nonlocal i
        kind, val, at = toks[i]
        i += 1
        if kind == 1:
            return Nat(int(val))
        if kind == 2:
            e = ssum()
            expect_close()
            return OmegaPow(e)
        if kind == 3:
            e = ssum()
            expect_close()
            return Eps(e)
        if kind == 4:
            return Omega
        if kind == 5:
            return OMEGA_FIN
        if kind == 6:
            e = ssum()
            expect_close()
            return e
        raise OrdinalError(f"unexpected token at {at}")

    def ssum():
        nonlocal i
        parts = list(_parts(atom()))
        while toks[i][0] == 8:
            i += 1
            parts.extend(_parts(atom()))
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    out = ssum()
    if toks[i][0] != 0:
        raise OrdinalError(f"trailing input at {toks[i][2]}")
    return out
