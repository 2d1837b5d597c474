"""The reflection pipeline and the `rsomega` command line.

reflect() checks a finitary proof, embeds it, lowers the cut rank to Omega+1,
checks the final bounds and then audits truth along the derivation.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from . import ord as O
from .embed import EmbedError, audit_embedding, embed_proof
from .hfset import (
    EvaluationError, Pi, Sigma, Universe, Verdict, ev_term, truth_delta0, truth_level, v_or,
)
from .kpcalc import FinProof, ProofError, ProofFile, check_fin, corpus_names, load_corpus, load_path
from .rsderiv import (
    BATTERY_VERSION, BRANCHING, Branch, Derivation, MalformedDerivation, Rule, addr_text,
    axiom, check_wf_bounded, child_addresses, dump, get_battery, node_info, walk,
)
from .syntax import (
    C_EMPTY, FVar, ParseError, decompose, formula_rank, is_delta0, levels, mem, negate,
    parse_formula, parse_term, serialize, sorted_seq,
)
from .transforms import check_contract, cut_elim, inv, omega_offset, red, wkn

REPORT_VERSION = 1
T, F, U = Verdict.TRUE, Verdict.FALSE, Verdict.UNKNOWN


class AuditRefused(ValueError):
    pass


class SabotageError(ValueError):
    pass


# -- truth audit ---------------------------------------------------------------

def _level_of(f):
    # sequents are read at Pi_n with n >= 2
    return Pi(max(2, levels(f)[1]))


def sequent_verdict(seq, u: Universe) -> Verdict:
    return v_or(truth_level(f, _level_of(f), u) for f in sorted_seq(seq))


def audit_battery(battery, u: Universe) -> tuple:
    """The battery terms whose values lie in the universe."""
    members = set(u.members)
    out = []
    for t in get_battery(battery):
        try:
            v = ev_term(t, (), u.omega_fuel)
        except EvaluationError:
            continue
        if v in members:
            out.append(t)
    return tuple(out)


@dataclass
class TruthWalk:
    verdict: Verdict = T
    visited: List[Tuple[tuple, Rule, Verdict]] = field(default_factory=list)
    violations: List[Tuple[tuple, str]] = field(default_factory=list)
    unknown: List[Tuple[tuple, str]] = field(default_factory=list)
    cuts: List[Tuple[tuple, str, Verdict]] = field(default_factory=list)
    reflections: List[Tuple[tuple, Verdict, Verdict]] = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "visited": len(self.visited),
            "violations": [{"address": addr_text(a), "message": m} for a, m in self.violations],
            "unknown": [{"address": addr_text(a), "message": m} for a, m in self.unknown],
            "cuts": [{"address": addr_text(a), "formula": f, "verdict": v.value} for a, f, v in self.cuts],
            "reflections": [{"address": addr_text(a), "premise": va.value, "reflected": vr.value}
                            for a, va, vr in self.reflections],
        }


def verify_truth_walk(w: Derivation, universe: Optional[Universe] = None, battery="std",
                      fuel: int = 6) -> TruthWalk:
    """Evaluate the end sequent at every node to depth `fuel`.

    Branches are sampled on the battery terms that denote members of the
    universe. The verdict is False if some visited sequent is false, Unknown
    if some verdict ran out of omega fuel, and True otherwise.
    """
    u = universe or Universe()
    top = O.succ(O.Omega)
    if not O.le(w.rank, top):
        raise AuditRefused(f"rank {O.to_text(w.rank)} is above W + 1; eliminate cuts first")
    terms = audit_battery(battery, u)
    if not terms:
        raise AuditRefused("no battery term denotes a member of the universe")
    out = TruthWalk()
    seen_bad = set()

    def flag(addr, v, what):
        if v is F and (addr, what) not in seen_bad:
            seen_bad.add((addr, what))
            out.violations.append((addr, what))
        elif v is U:
            out.unknown.append((addr, what.replace("false", "undecided")))

    level = [((), w)]
    for d in range(fuel):
        nxt = []
        for addr, node in level:
            v = sequent_verdict(node.end, u)
            out.visited.append((addr, node.rule, v))
            flag(addr, v, "end sequent is false")
            if node.rule is Rule.CUT:
                _audit_cut(node, addr, u, out, flag)
            elif node.rule is Rule.SIGMA_REF:
                _audit_reflection(node, addr, u, out)
            if d + 1 < fuel:
                xs = terms if node.rule in BRANCHING else range(node.arity)
                nxt += [(addr + (x,), node.child(x)) for x in xs]
        level = nxt
    out.verdict = F if out.violations else U if out.unknown else T
    return out


def _audit_cut(node: Derivation, addr, u, out: TruthWalk, flag) -> None:
    A = node.principal
    s, p = levels(A)
    if min(s, p) > 1:
        out.violations.append((addr, f"cut formula {serialize(A)} is not Sigma1 or Pi1"))
        return
    out.cuts.append((addr, serialize(A), truth_level(A, Sigma(1) if s <= 1 else Pi(1), u)))
    # both premises are confirmed here even when the depth ends below the cut
    for i in (0, 1):
        flag(addr + (i,), sequent_verdict(node.kid(i).end, u), "end sequent is false")


def _audit_reflection(node: Derivation, addr, u, out: TruthWalk) -> None:
    va = truth_level(node.minor, Sigma(max(1, levels(node.minor)[0])), u)
    vr = truth_level(node.principal, Sigma(max(1, levels(node.principal)[0])), u)
    out.reflections.append((addr, va, vr))
    if vr is T and va is F:
        out.violations.append((addr, "reflected formula true but premise formula false"))
    elif va is T and vr is F:
        # A holds in V_k but no z in V_k bounds its witnesses
        out.unknown.append((addr, "reflection witness outside the universe"))
    elif U in (va, vr):
        out.unknown.append((addr, "reflection undecided"))


# -- reports -------------------------------------------------------------------

@dataclass
class Stage:
    name: str
    info: object  # NodeInfo, or None before a derivation exists
    wall_time: float

    def as_json(self, timings: bool = True) -> dict:
        d = {"name": self.name, "root": None if self.info is None else self.info.as_json()}
        if timings:
            d["wall_time"] = round(self.wall_time, 6)
        return d


@dataclass
class PipelineReport:
    proof: str = ""
    settings: Dict[str, object] = field(default_factory=dict)
    stages: List[Stage] = field(default_factory=list)
    final_rank: object = None
    final_length: object = None
    eps_index: Optional[int] = None
    truth_verdict: Optional[Verdict] = None
    explored_nodes: int = 0
    violations: List[Tuple[str, tuple, str]] = field(default_factory=list)
    undetermined: List[Tuple[str, tuple, str]] = field(default_factory=list)
    aborted_at: Optional[str] = None
    sabotage: Optional[dict] = None
    audit: Optional[TruthWalk] = None

    @property
    def ok(self) -> bool:
        return self.aborted_at is None and self.truth_verdict is T

    @property
    def cut_elim_passes(self) -> int:
        return sum(s.name == "cut_elim" for s in self.stages)

    def stage_names(self) -> List[str]:
        return [s.name for s in self.stages]

    def as_json(self, timings: bool = True) -> dict:
        text = lambda a: None if a is None else O.to_text(a)  # noqa: E731
        return {
            "version": REPORT_VERSION,
            "proof": self.proof,
            "settings": self.settings,
            "ok": self.ok,
            "aborted_at": self.aborted_at,
            "sabotage": self.sabotage,
            "stages": [s.as_json(timings) for s in self.stages],
            "final_rank": text(self.final_rank),
            "final_length": text(self.final_length),
            "eps_index": self.eps_index,
            "truth_verdict": None if self.truth_verdict is None else self.truth_verdict.value,
            "explored_nodes": self.explored_nodes,
            "violations": [{"stage": s, "address": addr_text(a), "message": m}
                           for s, a, m in self.violations],
            "undetermined": [{"stage": s, "address": addr_text(a), "message": m}
                             for s, a, m in self.undetermined],
            "audit": None if self.audit is None else self.audit.as_json(),
        }


def strip_timings(report: dict) -> dict:
    out = dict(report)
    out["stages"] = [{k: v for k, v in s.items() if k != "wall_time"} for s in report["stages"]]
    return out


def report_schema_path() -> Path:
    return Path(__file__).with_name("report.schema.json")


# -- sabotage --------------------------------------------------------------------

@dataclass(frozen=True)
class Sabotage:
    name: str
    stage: str  # the stage that must reject it
    description: str
    on_proof: Optional[Callable] = None
    on_derivation: Optional[Callable] = None
    skip_cut_elim: bool = False


def _first_eigen(p: FinProof) -> Optional[str]:
    if p.rule in ("ball", "all"):
        return p.eigen
    for c in p.children:
        e = _first_eigen(c)
        if e:
            return e
    return None


def _sab_eigen(p: FinProof) -> FinProof:
    e = _first_eigen(p)
    if e is None:
        raise SabotageError("the proof has no eigenvariable")
    extra = mem(FVar(e), C_EMPTY)

    def go(q: FinProof) -> FinProof:
        return dataclasses.replace(q, end=q.end | {extra}, children=tuple(go(c) for c in q.children))

    return go(p)


def find_node(w: Derivation, pred, battery="std", limit: int = 20_000):
    """Depth-first search for the first node satisfying pred."""
    battery = get_battery(battery)
    stack = [((), w)]
    n = 0
    while stack and n < limit:
        addr, node = stack.pop()
        n += 1
        if pred(node):
            return addr, node
        for x in reversed(child_addresses(node, battery)):
            stack.append((addr + (x,), node.child(x)))
    raise SabotageError("no node to mutate")


def replace_at(w: Derivation, addr: tuple, new: Derivation) -> Derivation:
    """w with the subderivation at addr swapped for new; other children stay lazy."""
    if not addr:
        return new
    x, rest = addr[0], addr[1:]
    if w.rule in BRANCHING:
        old = w.branch
        br = Branch(lambda s: replace_at(old(s), rest, new) if s == x else old(s), old.label)
        return Derivation(w.rule, w.principal, w.side, w.length, w.rank, branch=br)
    kids: list = [(lambda i=i: w.kid(i)) for i in range(w.arity)]
    kids[x] = replace_at(w.kid(x), rest, new)
    return Derivation(w.rule, w.principal, w.side, w.length, w.rank, kids,
                      witness=w.witness, minor=w.minor)


def _sab_false_axiom(w, battery, u):
    def has_true(n):
        return n.rule is Rule.AXIOM and any(
            is_delta0(f) and truth_delta0(f, u) is T for f in n.end)

    addr, node = find_node(w, has_true, battery)
    bad = frozenset(negate(f) if is_delta0(f) and truth_delta0(f, u) is T else f for f in node.end)
    return replace_at(w, addr, axiom(bad)), addr


def _sab_length(w, battery, u):
    addr, node = find_node(w, lambda n: n.rule is not Rule.AXIOM, battery)
    x = child_addresses(node, get_battery(battery))[0]
    kid = node.child(x).relabel(length=node.length)
    return replace_at(w, addr, replace_at(node, (x,), kid)), addr


def _sab_cut_rank(w, battery, u):
    addr, node = find_node(w, lambda n: n.rule is Rule.CUT, battery)
    return replace_at(w, addr, node.relabel(rank=formula_rank(node.principal))), addr


SABOTAGES: Dict[str, Sabotage] = {s.name: s for s in (
    Sabotage("eigenvariable", "check", "put the eigenvariable into every end sequent",
             on_proof=_sab_eigen),
    Sabotage("false-axiom", "wf", "negate the true Delta0 formulas of one axiom leaf",
             on_derivation=_sab_false_axiom),
    Sabotage("length", "wf", "give a child the length of its parent",
             on_derivation=_sab_length),
    Sabotage("cut-rank", "wf", "lower a cut's rank bound to the rank of its cut formula",
             on_derivation=_sab_cut_rank),
    Sabotage("skip-cutelim", "bounds", "skip cut elimination", skip_cut_elim=True),
)}


# -- the pipeline ----------------------------------------------------------------------

def reflect(p, subst=None, universe: Optional[Universe] = None, battery="std", fuel: int = 6,
            sabotage: Optional[str] = None, name: str = "") -> PipelineReport:
    """Check, embed, eliminate cuts down to rank W+1, check bounds, audit truth.

    p may be a FinProof or a ProofFile (whose substitution is the default).
    A stage violation aborts the run; the report names the stage.
    """
    if isinstance(p, ProofFile):
        name = name or p.name
        subst = p.subst if subst is None else subst
        p = p.proof
    subst = {k: parse_term(v) if isinstance(v, str) else v for k, v in (subst or {}).items()}
    u = universe or Universe()
    bat = get_battery(battery)
    rep = PipelineReport(proof=name, settings={
        "universe_rank": u.rank_bound, "omega_fuel": u.omega_fuel, "with_omega": u.with_omega,
        "battery": battery if isinstance(battery, str) else "custom",
        "battery_version": BATTERY_VERSION, "depth": fuel,
        "subst": {k: serialize(v) for k, v in sorted(subst.items())},
    })
    sab = SABOTAGES[sabotage] if sabotage else None
    if sab:
        rep.sabotage = {"name": sab.name, "address": None}

    def fail(stage, items):
        rep.violations += [(stage, a, m) for a, m in items]
        rep.aborted_at = stage
        return rep

    t = time.perf_counter()
    if sab and sab.on_proof:
        p = sab.on_proof(p)
    chk = check_fin(p)
    rep.stages.append(Stage("check", None, time.perf_counter() - t))
    if not chk.ok:
        return fail("check", chk.violations)

    t = time.perf_counter()
    try:
        w = embed_proof(p, subst, check=False)
    except (EmbedError, EvaluationError) as e:
        return fail("embed", [((), str(e))])
    if sab and sab.on_derivation:
        w, addr = sab.on_derivation(w, bat, u)
        rep.sabotage["address"] = addr_text(addr)
    bad = audit_embedding(p, w, bat, min(fuel, 4))
    rep.stages.append(Stage("embed", node_info(w), time.perf_counter() - t))
    if bad:
        return fail("embed", bad)
    if not _wf(rep, w, bat, fuel, u):
        return rep

    m = omega_offset(w.rank)
    passes = 0 if sab and sab.skip_cut_elim else max(0, m - 1)
    for _ in range(passes):
        t = time.perf_counter()
        try:
            w = cut_elim(w)
        except MalformedDerivation as e:
            return fail("cut_elim", [((), str(e))])
        rep.stages.append(Stage("cut_elim", node_info(w), time.perf_counter() - t))
        if not _wf(rep, w, bat, fuel, u):
            return rep

    t = time.perf_counter()
    rep.final_rank, rep.final_length = w.rank, w.length
    below, rep.eps_index = O.below_eps_omega_plus_1(w.length)
    bad = []
    if not below:
        bad.append(((), f"length {O.to_text(w.length)} not below e(W + 1)"))
    if not O.le(w.rank, O.succ(O.Omega)):
        bad.append(((), f"rank {O.to_text(w.rank)} above W + 1"))
    rep.stages.append(Stage("bounds", node_info(w), time.perf_counter() - t))
    if bad:
        return fail("bounds", bad)

    t = time.perf_counter()
    walk_ = verify_truth_walk(w, u, bat, fuel)
    rep.stages.append(Stage("audit", node_info(w), time.perf_counter() - t))
    rep.audit = walk_
    rep.explored_nodes += len(walk_.visited)
    rep.truth_verdict = walk_.verdict
    rep.undetermined += [("audit", a, m) for a, m in walk_.unknown]
    if walk_.violations:
        return fail("audit", walk_.violations)
    return rep


def _wf(rep: PipelineReport, w: Derivation, bat, fuel: int, u: Universe) -> bool:
    t = time.perf_counter()
    wf = check_wf_bounded(w, bat, fuel, u)
    rep.stages.append(Stage("wf", node_info(w), time.perf_counter() - t))
    rep.explored_nodes += wf.explored
    rep.undetermined += [("wf", a, m) for a, m in wf.undetermined]
    if wf.violations:
        rep.violations += [("wf", a, m) for a, m in wf.violations]
        rep.aborted_at = "wf"
        return False
    return True


# -- command line ------------------------------------------------------------------------

_SUBST_KEY = re.compile(r"([A-Za-z_][\w']*)\s*=")


def parse_subst(text: str) -> Dict[str, object]:
    """Parse "a={} b={{}}" into a map from names to closed terms."""
    keys = list(_SUBST_KEY.finditer(text))
    if not keys:
        if text.strip():
            raise ValueError(f"cannot read substitution {text!r}")
        return {}
    if text[:keys[0].start()].strip():
        raise ValueError(f"cannot read substitution {text!r}")
    out = {}
    for k, nxt in zip(keys, keys[1:] + [None]):
        body = text[k.end(): nxt.start() if nxt else len(text)].strip()
        if not body:
            raise ValueError(f"no term for {k.group(1)}")
        out[k.group(1)] = parse_term(body)
    return out


def load_proof_arg(arg: str) -> ProofFile:
    """A path to a .kp file, or the name of a shipped corpus proof."""
    path = Path(arg)
    if path.is_file():
        pf = load_path(path)
        pf.name = pf.name or path.stem
        return pf
    stem = path.stem if path.suffix == ".kp" else arg
    if stem in corpus_names():
        pf = load_corpus(stem)
        pf.name = pf.name or stem
        return pf
    raise FileNotFoundError(f"no such proof file: {arg}")


_DEFAULTS = {"universe_rank": 4, "omega_fuel": 8, "battery": "std", "depth": None,
             "json": False, "with_omega": False}


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the subcommand from being reset after it
    p = argparse.ArgumentParser(add_help=False)
    s = argparse.SUPPRESS
    p.add_argument("--universe-rank", type=int, default=s, help="k for the universe V_k (default 4)")
    p.add_argument("--omega-fuel", type=int, default=s, help="naturals tried inside omega (default 8)")
    p.add_argument("--with-omega", action="store_true", default=s,
                   help="let unbounded quantifiers also range over omega")
    p.add_argument("--battery", default=s, help="branch test terms: std or small (default std)")
    p.add_argument("--depth", type=int, default=s, help="exploration depth")
    p.add_argument("--json", action="store_true", default=s, help="machine-readable output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="rsomega", parents=[common],
                                 description="KP proofs, infinitary derivations and reflection.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    o = sub.add_parser("ord", parents=[common], help="ordinal notations")
    osub = o.add_subparsers(dest="ord_cmd", required=True)
    for name, nargs, hlp in (("cmp", 2, "compare two notations"), ("nsum", 2, "natural sum"),
                             ("cnf", 1, "normal form"), ("below-eps", 1, "test a < e(W + 1)")):
        q = osub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("ords", nargs=nargs, metavar="ORD")

    k = sub.add_parser("kp", parents=[common], help="finitary proofs")
    ksub = k.add_subparsers(dest="kp_cmd", required=True)
    q = ksub.add_parser("check", parents=[common], help="check a proof file")
    q.add_argument("file")

    r = sub.add_parser("rs", parents=[common], help="infinitary derivations")
    rsub = r.add_subparsers(dest="rs_cmd", required=True)
    q = rsub.add_parser("embed", parents=[common], help="embed a proof and check it")
    q.add_argument("file")
    q.add_argument("--subst", default=None)
    q.add_argument("--audit-bounds", action="store_true", help="also check the embedding bounds")
    q = rsub.add_parser("dump", parents=[common], help="print the embedded derivation")
    q.add_argument("file")
    q.add_argument("--subst", default=None)
    q = rsub.add_parser("transform", parents=[common], help="apply one transformer")
    q.add_argument("file")
    q.add_argument("--subst", default=None)
    q.add_argument("--op", required=True, choices=["wkn", "inv", "red", "cutelim"])
    q.add_argument("--formula", default=None, help="formula to add (wkn) or invert (inv)")
    q.add_argument("--index", default="0", help="inv: 0/1 or a closed term")

    q = sub.add_parser("reflect", parents=[common], help="run the reflection pipeline")
    q.add_argument("file")
    q.add_argument("--subst", default=None)
    q.add_argument("--sabotage", choices=sorted(SABOTAGES), default=None)
    q.add_argument("--no-timings", action="store_true", help="omit wall times from the report")
    return ap


def _opts(ns) -> argparse.Namespace:
    for k, v in _DEFAULTS.items():
        if not hasattr(ns, k):
            setattr(ns, k, v)
    return ns


def _universe(ns) -> Universe:
    return Universe(ns.universe_rank, ns.omega_fuel, ns.with_omega)


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _embedded(ns):
    pf = load_proof_arg(ns.file)
    subst = parse_subst(ns.subst) if ns.subst is not None else pf.subst
    return pf, embed_proof(pf.proof, subst)


def _cmd_ord(ns) -> int:
    xs = [O.parse_ord(a) for a in ns.ords]
    c = ns.ord_cmd
    if c == "cmp":
        print({O.Cmp.Less: "<", O.Cmp.Equal: "=", O.Cmp.Greater: ">"}[O.compare(*xs)])
    elif c == "nsum":
        print(O.to_text(O.natural_sum(*xs)))
    elif c == "cnf":
        print(O.to_text(O.normalize_cnf(xs[0])))
    else:
        ok, n = O.below_eps_omega_plus_1(xs[0])
        print(f"yes {n}" if ok else "no")
        return 0 if ok else 1
    return 0


def _cmd_kp(ns) -> int:
    pf = load_proof_arg(ns.file)
    rep = check_fin(pf.proof)
    if ns.json:
        _print_json(rep.as_json())
    elif rep.ok:
        print("valid")
    else:
        print("invalid")
        for a, m in rep.violations:
            print(f"  {addr_text(a)}: {m}")
    return 0 if rep.ok else 1


def _cmd_rs(ns) -> int:
    pf, w = _embedded(ns)
    u = _universe(ns)
    if ns.rs_cmd == "dump":
        depth = ns.depth or 3
        if ns.json:
            _print_json([{"address": addr_text(a), **node_info(n).as_json()}
                         for a, n in walk(w, ns.battery, depth)])
        else:
            print(dump(w, ns.battery, depth))
        return 0
    depth = ns.depth or 6
    if ns.rs_cmd == "embed":
        wf = check_wf_bounded(w, ns.battery, depth, u)
        bounds = audit_embedding(pf.proof, w, ns.battery, min(depth, 4)) if ns.audit_bounds else []
        out = {"root": node_info(w).as_json(), "wf": wf.as_json(),
               "bounds": [{"address": addr_text(a), "message": m} for a, m in bounds]}
        if ns.json:
            _print_json(out)
        else:
            print(f"{w.rule.value} length {O.to_text(w.length)} rank {O.to_text(w.rank)}")
            print(f"end {serialize(w.end)}")
            status = "ok" if wf.ok else f"{len(wf.violations)} violation(s)"
            print(f"wf {status} ({wf.explored} nodes, {len(wf.undetermined)} undetermined)")
            for a, m in wf.violations + bounds:
                print(f"  {addr_text(a)}: {m}")
            if ns.audit_bounds and not bounds:
                print("bounds ok")
        return 0 if wf.ok and not bounds else 1
    return _transform(ns, w, u, depth)


def _transform(ns, w: Derivation, u: Universe, depth: int) -> int:
    op = ns.op
    if op == "wkn":
        if ns.formula is None:
            raise ValueError("wkn needs --formula")
        extra = frozenset([parse_formula(ns.formula)])
        out, ins, kw = wkn(extra, w), [w], {"formula": extra}
    elif op == "inv":
        if ns.formula is None:
            raise ValueError("inv needs --formula")
        A = parse_formula(ns.formula)
        i = int(ns.index) if ns.index.isdigit() and decompose(A) and decompose(A).binary \
            else parse_term(ns.index)
        out, ins, kw = inv(A, w, i), [w], {"formula": A, "index": i}
    elif op == "red":
        if w.rule is not Rule.CUT:
            raise ValueError("red needs a derivation whose last inference is a cut")
        A = w.principal
        w0, w1 = w.kid(0), w.kid(1)
        out, ins, kw = red(A, w0, w1), [w0, w1], {"formula": A}
    else:
        out, ins, kw = cut_elim(w), [w], {}
    contract = check_contract(op, out, ins, **kw)
    wf = check_wf_bounded(out, ns.battery, depth, u)
    trace = [{"address": addr_text(a), **node_info(n).as_json()}
             for a, n in walk(out, ns.battery, min(depth, 3))]
    _print_json({"op": op, "contract": contract, "wf": wf.as_json(), "trace": trace})
    return 0 if wf.ok and not contract else 1


def _cmd_reflect(ns) -> int:
    pf = load_proof_arg(ns.file)
    subst = parse_subst(ns.subst) if ns.subst is not None else pf.subst
    rep = reflect(pf.proof, subst, _universe(ns), ns.battery, ns.depth or 6,
                  sabotage=ns.sabotage, name=pf.name)
    _print_json(rep.as_json(timings=not ns.no_timings))
    return 0 if rep.ok else 1


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        ns = _opts(ap.parse_args(argv))
    except SystemExit as e:
        return int(e.code or 0)
    handlers = {"ord": _cmd_ord, "kp": _cmd_kp, "rs": _cmd_rs, "reflect": _cmd_reflect}
    try:
        get_battery(ns.battery)
        _universe(ns)
        return handlers[ns.cmd](ns)
    except (FileNotFoundError, ParseError, ProofError, EmbedError, ValueError, O.OrdinalError) as e:
        print(f"rsomega: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
