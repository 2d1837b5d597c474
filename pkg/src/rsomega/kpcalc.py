"""Finitary one-sided sequent calculus for KP, proof checking and the .kp format.

Proof trees are built from eight axiom schemas and the rules and, or, ball, bex,
all, ex, cut. Formulas may contain free variables (FVar); compound terms are
closed. A rule with principal P and premises Gamma, A_i concludes Gamma, P,
where Gamma may or may not already contain P.

File format (S-expressions, `;` comments):

    (proof (meta (name pair) (subst (a {}) (b {{}})) (k 0) (m 0))
      NODE)

    NODE := (axiom logical (formula F) [(end F...)])
          | (axiom ext (terms a b) (body x B) [(end ...)])
          | (axiom ind (body x F) ...) | (axiom pair (terms a b) ...)
          | (axiom union (terms a) ...) | (axiom inf ...)
          | (axiom sep (terms a) (body x B) ...)
          | (axiom col (terms a) (body x y G) ...)
          | (and P NODE NODE [(end ...)]) | (or 0|1 P NODE [(end ...)])
          | (ball a P NODE [(end ...)]) | (all a P NODE [(end ...)])
          | (bex s P NODE [(end ...)]) | (ex s P NODE [(end ...)])
          | (cut A NODE NODE [(end ...)])

An omitted end sequent is inferred: the schema formula for axioms, and the
premise minus the minor formula plus the principal for rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .syntax import (
    And, BExists, BForall, BVar, FVar, Or, ParseError, UExists, UForall, V0,
    _max_dangling, _Reader, equals, free_vars, instantiate, is_delta0,
    mem, negate, nmem, read_sexprs, reflect_formula, serialize, sorted_seq,
)

SCHEMAS = ("logical", "ext", "ind", "pair", "union", "inf", "sep", "col")
RULES = ("and", "or", "ball", "bex", "all", "ex", "cut")


class ProofError(ValueError):
    pass


@dataclass(frozen=True)
class FinProof:
    rule: str                     # "axiom" or one of RULES
    end: frozenset
    children: tuple = ()
    principal: object = None      # rules: principal formula; cut: cut formula
    schema: Optional[str] = None  # axioms only
    inst: tuple = ()              # axioms: sorted (key, value) pairs
    pick: Optional[int] = None    # or
    eigen: Optional[str] = None   # ball, all
    witness: object = None        # bex, ex

    @property
    def args(self) -> dict:
        return dict(self.inst)


@dataclass
class ProofFile:
    proof: FinProof
    name: str = ""
    subst: Dict[str, object] = field(default_factory=dict)
    expect: Dict[str, int] = field(default_factory=dict)


# -- schema formulas -----------------------------------------------------------

def pair_formula(a, b):
    return UExists(And(mem(a, V0), mem(b, V0)))


def union_formula(a):
    # exists z (forall y in a)(forall x in y) x in z
    return UExists(BForall(a, BForall(V0, mem(V0, BVar(2)))))


def inf_formula():
    return UExists(And(BExists(V0, mem(V0, BVar(1))),
                       BForall(V0, BExists(BVar(1), mem(BVar(1), V0)))))


def sep_formula(a, body):
    """exists y ((forall x in y)(x in a and B(x)) and (forall x in a)(B(x) -> x in y))."""
    return UExists(And(BForall(V0, And(mem(V0, a), body)),
                       BForall(a, Or(negate(body), mem(V0, BVar(1))))))


def col_premise(a, body2):
    """(forall x in a) exists y G(x, y); body2 sees y as BVar(0) and x as BVar(1)."""
    return BForall(a, UExists(body2))


def col_formula(a, body2):
    p = col_premise(a, body2)
    return Or(negate(p), reflect_formula(p))


def ind_hypothesis(body):
    """forall x ((forall y in x) F(y) -> F(x))."""
    return UForall(Or(negate(BForall(V0, body)), body))


def ind_formula(body):
    return Or(negate(ind_hypothesis(body)), UForall(body))


def ext_formula(a, b, body):
    return Or(Or(negate(equals(a, b)), negate(instantiate(body, a))), instantiate(body, b))


def schema_formula(schema: str, args: dict):
    """The distinguished formula of an axiom instance (for logical: A)."""
    if schema == "logical":
        return args["formula"]
    if schema == "ext":
        return ext_formula(args["a"], args["b"], args["body"])
    if schema == "ind":
        return ind_formula(args["body"])
    if schema == "pair":
        return pair_formula(args["a"], args["b"])
    if schema == "union":
        return union_formula(args["a"])
    if schema == "inf":
        return inf_formula()
    if schema == "sep":
        return sep_formula(args["a"], args["body"])
    if schema == "col":
        return col_formula(args["a"], args["body"])
    raise ProofError(f"unknown axiom schema {schema!r}")


_SCHEMA_KEYS = {
    "logical": {"formula"}, "ext": {"a", "b", "body"}, "ind": {"body"},
    "pair": {"a", "b"}, "union": {"a"}, "inf": set(), "sep": {"a", "body"},
    "col": {"a", "body"},
}
_SLOTS = {"ext": 1, "ind": 1, "sep": 1, "col": 2}


def _required(schema: str, args: dict) -> frozenset:
    f = schema_formula(schema, args)
    return frozenset([f, negate(f)]) if schema == "logical" else frozenset([f])


def _validate_inst(schema: str, args: dict) -> None:
    if schema not in SCHEMAS:
        raise ProofError(f"unknown axiom schema {schema!r}")
    if set(args) != _SCHEMA_KEYS[schema]:
        raise ProofError(f"{schema} axiom needs {sorted(_SCHEMA_KEYS[schema])}")
    for k in ("a", "b"):
        t = args.get(k)
        if t is not None and isinstance(t, BVar):
            raise ProofError("axiom parameters must be free variables or closed terms")
    if "body" in args:
        body = args["body"]
        if _max_dangling(body) > _SLOTS[schema]:
            raise ProofError(f"{schema} body has more than {_SLOTS[schema]} slot(s)")
        if schema in ("sep", "col") and not is_delta0(body):
            raise ProofError(f"{schema} body must be Delta0")
    if "formula" in args and not is_closed_open(args["formula"]):
        raise ProofError("logical axiom formula has dangling bound variables")


def is_closed_open(f) -> bool:
    """No dangling bound variables; free variables are allowed."""
    return _max_dangling(f) == 0


def mk_axiom(schema: str, end=(), **args) -> FinProof:
    """An axiom leaf; the end sequent defaults to the required formulas."""
    _validate_inst(schema, args)
    req = _required(schema, args)
    return FinProof("axiom", frozenset(end) | req, schema=schema,
                    inst=tuple(sorted(args.items())))


def minor_of(p: FinProof, i: int = 0):
    P = p.principal
    if p.rule == "and":
        return (P.left, P.right)[i]
    if p.rule == "or":
        return (P.left, P.right)[p.pick]
    if p.rule == "ball":
        return Or(nmem(FVar(p.eigen), P.bound), instantiate(P.body, FVar(p.eigen)))
    if p.rule == "bex":
        return And(mem(p.witness, P.bound), instantiate(P.body, p.witness))
    if p.rule == "all":
        return instantiate(P.body, FVar(p.eigen))
    if p.rule == "ex":
        return instantiate(P.body, p.witness)
    if p.rule == "cut":
        return P if i == 0 else negate(P)
    raise ProofError("axioms have no premises")


_PRINCIPAL_SHAPE = {"and": And, "or": Or, "ball": BForall, "bex": BExists,
                    "all": UForall, "ex": UExists}


def rule(kind: str, principal, *children: FinProof, end=None, pick=None, eigen=None,
         witness=None) -> FinProof:
    """Build a rule node, inferring its end sequent when not given."""
    p = FinProof(kind, frozenset(), tuple(children), principal, pick=pick,
                 eigen=eigen, witness=witness)
    if end is None:
        base = children[0].end - {minor_of(p, 0)}
        end = base if kind == "cut" else base | {principal}
    return replace(p, end=frozenset(end))


# -- checking --------------------------------------------------------------------

@dataclass
class CheckReport:
    violations: List[Tuple[tuple, str]]
    k: int  # number of ball/all inferences

    @property
    def ok(self) -> bool:
        return not self.violations

    def as_json(self) -> dict:
        return {"ok": self.ok, "k": self.k,
                "violations": [{"address": "/" + "/".join(map(str, a)), "message": m}
                               for a, m in self.violations]}


def check_fin(p: FinProof) -> CheckReport:
    out: List[Tuple[tuple, str]] = []
    k = 0
    stack = [((), p)]
    while stack:
        addr, node = stack.pop()
        if node.rule in ("ball", "all"):
            k += 1
        for m in _check_node(node):
            out.append((addr, m))
        for i, c in enumerate(node.children):
            stack.append((addr + (i,), c))
    out.sort(key=lambda v: v[0])
    return CheckReport(out, k)


def _check_node(p: FinProof) -> List[str]:
    bad = [f"dangling bound variable in {serialize(f)}" for f in p.end if not is_closed_open(f)]
    if bad:
        return bad
    if p.rule == "axiom":
        try:
            _validate_inst(p.schema, p.args)
            req = _required(p.schema, p.args)
        except (ProofError, KeyError) as e:
            return [str(e)]
        if not req <= p.end:
            return [f"{p.schema} axiom formula missing from end sequent"]
        return []
    if p.rule not in RULES:
        return [f"unknown rule {p.rule!r}"]
    want = 2 if p.rule in ("and", "cut") else 1
    if len(p.children) != want:
        return [f"{p.rule} takes {want} premise(s)"]
    P = p.principal
    if p.rule != "cut":
        if not isinstance(P, _PRINCIPAL_SHAPE[p.rule]):
            return [f"principal formula does not fit rule {p.rule}"]
        if P not in p.end:
            return ["principal formula missing from end sequent"]
    elif not is_closed_open(P):
        return ["cut formula has dangling bound variables"]
    if p.rule == "or" and p.pick not in (0, 1):
        return ["or needs a disjunct index 0 or 1"]
    if p.rule in ("bex", "ex"):
        if p.witness is None or isinstance(p.witness, BVar):
            return ["witness must be a free variable or closed term"]
    if p.rule in ("ball", "all"):
        if not p.eigen:
            return ["missing eigenvariable"]
        if any(p.eigen in free_vars(f) for f in p.end):
            return [f"eigenvariable {p.eigen} occurs in the lower sequent"]
    minors = [minor_of(p, i) for i in range(want)]
    # Gamma is either the conclusion without the principal or the whole conclusion
    cands = [p.end] if p.rule == "cut" else [p.end - {P}, p.end]
    for gamma in cands:
        if all(c.end == gamma | {m} for c, m in zip(p.children, minors)):
            return []
    return ["premise end sequent does not match the rule"]


def count_k(p: FinProof) -> int:
    return (p.rule in ("ball", "all")) + sum(count_k(c) for c in p.children)


def cut_formulas(p: FinProof) -> list:
    out = [p.principal] if p.rule == "cut" else []
    for c in p.children:
        out += cut_formulas(c)
    return out


def proof_free_vars(p: FinProof) -> frozenset:
    out = frozenset()
    for f in p.end:
        out |= free_vars(f)
    return out


# -- reading and writing ---------------------------------------------------------

class _ProofReader(_Reader):
    def opt_end(self, items, scope=()):
        if items and self.head(items[-1]) == "end":
            return items[:-1], frozenset(self.formula(x, scope) for x in items[-1][1][1:])
        return items, None

    def node(self, n) -> FinProof:
        h = self.head(n)
        items = n[1][1:]
        if h == "axiom":
            return self.axiom(n, items)
        if h not in RULES:
            raise self.err(f"expected a proof node, got {h!r}", n)
        items, end = self.opt_end(items)
        try:
            if h in ("and", "cut"):
                if len(items) != 3:
                    raise self.err(f"'{h}' takes a formula and two premises", n)
                f = self.formula(items[0], ())
                return rule(h, f, self.node(items[1]), self.node(items[2]), end=end)
            if len(items) != 3:
                raise self.err(f"'{h}' takes a parameter, a formula and a premise", n)
            param, f, sub = items
            f = self.formula(f, ())
            kid = self.node(sub)
            if h == "or":
                if param[0] != "atom" or param[1] not in ("0", "1"):
                    raise self.err("or needs 0 or 1", param)
                return rule(h, f, kid, end=end, pick=int(param[1]))
            if h in ("ball", "all"):
                return rule(h, f, kid, end=end, eigen=self.name(param))
            return rule(h, f, kid, end=end, witness=self.term(param, ()))
        except (IndexError, AttributeError, TypeError):
            raise self.err(f"malformed '{h}' node", n) from None

    def axiom(self, n, items) -> FinProof:
        if not items or items[0][0] != "atom":
            raise self.err("axiom needs a schema name", n)
        schema = items[0][1]
        if schema not in SCHEMAS:
            raise self.err(f"unknown axiom schema {schema!r}", items[0])
        rest, end = self.opt_end(items[1:])
        args = {}
        for part in rest:
            h = self.head(part)
            vals = part[1][1:]
            if h == "formula" and len(vals) == 1:
                args["formula"] = self.formula(vals[0], ())
            elif h == "terms":
                for key, v in zip(("a", "b"), vals):
                    args[key] = self.term(v, ())
            elif h == "body" and vals:
                names = tuple(self.name(v) for v in vals[:-1])
                args["body"] = self.formula(vals[-1], names)
            else:
                raise self.err(f"unexpected axiom argument {h!r}", part)
        try:
            return mk_axiom(schema, end or (), **args)
        except ProofError as e:
            raise self.err(str(e), n) from None


def parse_proof_file(text: str) -> ProofFile:
    nodes = read_sexprs(text)
    rd = _ProofReader(text)
    if len(nodes) != 1 or rd.head(nodes[0]) != "proof":
        raise ParseError("expected a single (proof ...) form", 0, text)
    items = nodes[0][1][1:]
    pf = ProofFile(proof=None)  # type: ignore[arg-type]
    if items and rd.head(items[0]) == "meta":
        for entry in items[0][1][1:]:
            h = rd.head(entry)
            vals = entry[1][1:]
            if h == "name" and len(vals) == 1:
                pf.name = vals[0][1]
            elif h == "subst":
                for pair in vals:
                    if pair[0] != "list" or len(pair[1]) != 2:
                        raise rd.err("subst entries are (name term)", pair)
                    pf.subst[rd.name(pair[1][0])] = rd.term(pair[1][1], ())
            elif h in ("k", "m") and len(vals) == 1:
                pf.expect[h] = int(vals[0][1])
            else:
                raise rd.err(f"unknown meta entry {h!r}", entry)
        items = items[1:]
    if len(items) != 1:
        raise ParseError("a proof holds exactly one root node", 0, text)
    pf.proof = rd.node(items[0])
    return pf


def parse_proof(text: str) -> FinProof:
    return parse_proof_file(text).proof


def _body_text(body, slots: int) -> str:
    names = " ".join(f"x{i}" for i in range(slots))
    return f"(body {names} {serialize(body, slots)})"


def dump_proof(p: FinProof, indent: int = 1) -> str:
    pad = "  " * indent
    end = "(end" + "".join(" " + serialize(f) for f in sorted_seq(p.end)) + ")"
    if p.rule == "axiom":
        parts = [p.schema]
        a = p.args
        if "formula" in a:
            parts.append(f"(formula {serialize(a['formula'])})")
        terms = [serialize(a[k]) for k in ("a", "b") if k in a]
        if terms:
            parts.append("(terms " + " ".join(terms) + ")")
        if "body" in a:
            parts.append(_body_text(a["body"], _SLOTS[p.schema]))
        return f"(axiom {' '.join(parts)} {end})"
    if p.rule in ("and", "cut"):
        head = f"({p.rule} {serialize(p.principal)}"
    elif p.rule == "or":
        head = f"(or {p.pick} {serialize(p.principal)}"
    elif p.rule in ("ball", "all"):
        head = f"({p.rule} {p.eigen} {serialize(p.principal)}"
    else:
        head = f"({p.rule} {serialize(p.witness)} {serialize(p.principal)}"
    kids = "".join(f"\n{pad}{dump_proof(c, indent + 1)}" for c in p.children)
    return f"{head}{kids}\n{pad}{end})"


def dump_proof_file(pf: ProofFile) -> str:
    meta = []
    if pf.name:
        meta.append(f"(name {pf.name})")
    if pf.subst:
        meta.append("(subst" + "".join(f" ({k} {serialize(v)})" for k, v in sorted(pf.subst.items())) + ")")
    for key in sorted(pf.expect):
        meta.append(f"({key} {pf.expect[key]})")
    head = f"(proof (meta {' '.join(meta)})" if meta else "(proof"
    return f"{head}\n  {dump_proof(pf.proof, 2)})\n"


# -- corpus ------------------------------------------------------------------------

def corpus_dir() -> Path:
    return Path(str(resources.files("rsomega") / "corpus"))


def corpus_names() -> List[str]:
    return sorted(p.stem for p in corpus_dir().glob("*.kp"))


def load_corpus(name: str) -> ProofFile:
    path = corpus_dir() / f"{name}.kp"
    if not path.exists():
        raise FileNotFoundError(f"no corpus proof named {name!r}")
    return parse_proof_file(path.read_text())


def corpus() -> List[ProofFile]:
    """Every shipped proof, named and in name order."""
    return [load_corpus(n) for n in corpus_names()]


def load_path(path) -> ProofFile:
    return parse_proof_file(Path(path).read_text())
