"""One-level structural induction over congruence closure.

The induction step for constructor ``C`` replaces the first placeholder of
the datatype by ``C(iv1, ..)`` with fresh leaves. The hypothesis is the
conjecture itself with that placeholder replaced by a recursive ``iv`` leaf;
because the leaf is a constant it can only fire on the structurally smaller
argument.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from Agents.Inferenceagent.soe import Conjecture, ConjectureStatus, normalize
from Agents.Parseragent.terms import (
    Datatype,
    Equation,
    FuncDecl,
    Symbol,
    Term,
    placeholder,
    substitute,
    to_equation,
    uninterpreted,
)
from Agents.Rewriteagent.egraph import EGraph
from Agents.Rewriteagent.rewrite import (
    RewriteRule,
    RuleError,
    RuleOrigin,
    RuleSet,
    SaturationAbort,
    SearchLimits,
    compile_equation,
)

logger = logging.getLogger(__name__)

# Placeholders repeated more often than this are not generalized.
MAX_GENERALIZED_OCCURRENCES = 6

Path = Tuple[int, ...]


@dataclass
class Lemma:
    equation: Equation
    rules: List[RewriteRule]
    conjecture: Conjecture
    generalization: Conjecture
    proved_at: str = field(default_factory=lambda: datetime.now().isoformat(timespec="seconds"))

    def __str__(self) -> str:
        return str(self.equation)


@dataclass
class ProofCase:
    constructor: FuncDecl
    lhs: Term
    rhs: Term
    hypotheses: List[RewriteRule] = field(default_factory=list)


@dataclass
class ProofObligation:
    conjecture: Conjecture
    datatype: Datatype
    cases: List[ProofCase] = field(default_factory=list)


@dataclass
class ProofFailure:
    conjecture: Conjecture
    reason: str
    datatype: Optional[str] = None
    case: Optional[str] = None

    def __bool__(self) -> bool:
        return False


ProofResult = Union[Lemma, ProofFailure]


# generalization -------------------------------------------------------------


def _occurrences(term: Term, sym: Symbol, path: Path = ()) -> Iterator[Path]:
    if term.head == sym and term.is_leaf:
        yield path
    for i, arg in enumerate(term.args):
        yield from _occurrences(arg, sym, path + (i,))


def _replace_paths(term: Term, replacements: Dict[Path, Term], path: Path = ()) -> Term:
    if path in replacements:
        return replacements[path]
    if term.is_leaf:
        return term
    return Term(term.head, tuple(_replace_paths(a, replacements, path + (i,)) for i, a in enumerate(term.args)))


def _set_partitions(items: Sequence) -> Iterator[List[List]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in _set_partitions(rest):
        yield [[first]] + partial
        for i in range(len(partial)):
            yield partial[:i] + [[first] + partial[i]] + partial[i + 1:]


def _splittings(occurrences: List[Tuple[int, Path]]) -> List[List[List[Tuple[int, Path]]]]:
    """Ways to split one placeholder's occurrences so every group spans both sides."""
    options = []
    for blocks in _set_partitions(occurrences):
        if len(blocks) == 1 or all({side for side, _ in b} == {0, 1} for b in blocks):
            options.append(sorted(blocks, key=lambda b: min(b)))
    return options


def generalize(conj: Conjecture) -> List[Conjecture]:
    """Variants with repeated placeholders renamed apart, most general first, ``conj`` last."""
    per_symbol = []
    for sym in conj.placeholders():
        occ = [(0, p) for p in _occurrences(conj.lhs, sym)] + [(1, p) for p in _occurrences(conj.rhs, sym)]
        if len(occ) < 2 or len(occ) > MAX_GENERALIZED_OCCURRENCES:
            continue
        per_symbol.append((sym, _splittings(occ)))
    next_index: Dict = {}
    for sym in conj.placeholders():
        next_index[sym.sort] = max(next_index.get(sym.sort, 0), sym.index)
    variants: List[Tuple[int, int, Conjecture]] = []
    for n, choice in enumerate(itertools.product(*(opts for _, opts in per_symbol))):
        counters = dict(next_index)
        replacements: Tuple[Dict[Path, Term], Dict[Path, Term]] = ({}, {})
        extra = 0
        for (sym, _), blocks in zip(per_symbol, choice):
            for block in blocks[1:]:
                counters[sym.sort] += 1
                extra += 1
                fresh = placeholder(counters[sym.sort], sym.sort)
                for side, path in block:
                    replacements[side][path] = fresh
        if not extra:
            continue
        lhs = _replace_paths(conj.lhs, replacements[0])
        rhs = _replace_paths(conj.rhs, replacements[1])
        variants.append((-extra, n, Conjecture(*normalize(lhs, rhs))))
    result: Dict[str, Conjecture] = {}
    for _, _, variant in sorted(variants, key=lambda v: (v[0], v[1])):
        if variant.key != conj.key:
            result.setdefault(variant.key, variant)
    result.pop(conj.key, None)
    return list(result.values()) + [conj]


def induction_variants(conj: Conjecture) -> List[Conjecture]:
    """``conj`` plus one copy per other placeholder of a sort moved into first position."""
    variants = [conj]
    for sym in conj.placeholders():
        if sym.index == 1:
            continue
        first = placeholder(1, sym.sort)
        swap = {sym: first, first.head: Term(sym)}
        variants.append(Conjecture(substitute(conj.lhs, swap), substitute(conj.rhs, swap)))
    return variants


# induction ------------------------------------------------------------------


def build_obligation(conj: Conjecture, datatype: Datatype) -> ProofObligation:
    iv = placeholder(1, datatype.sort).head
    counter = itertools.count(1)
    obligation = ProofObligation(conj, datatype)
    for ctor in datatype.constructors:
        args = [uninterpreted(f"iv{next(counter)}", s) for s in ctor.arg_sorts]
        case = ProofCase(
            ctor,
            substitute(conj.lhs, {iv: ctor(*args)}),
            substitute(conj.rhs, {iv: ctor(*args)}),
        )
        for arg in args:
            if arg.sort != datatype.sort:
                continue
            eq = to_equation(substitute(conj.lhs, {iv: arg}), substitute(conj.rhs, {iv: arg}), f"IH[{arg}]")
            try:
                case.hypotheses.extend(compile_equation(eq, RuleOrigin.INDUCTION_HYPOTHESIS, wf_guard=arg))
            except RuleError:
                logger.debug("hypothesis %s is not usable as a rule", eq)
        obligation.cases.append(case)
    return obligation


def _discharge(case: ProofCase, rules: RuleSet, limits: SearchLimits) -> bool:
    g = EGraph()
    a, b = g.add(case.lhs), g.add(case.rhs)
    try:
        limits.search(g, rules.extend(case.hypotheses), target=(a, b))
    except SaturationAbort as exc:
        logger.warning("case %s: %s", case.constructor.name, exc)
    merged = g.equiv(a, b)
    if limits.trace:
        logger.debug("case=%s result=%s", case.constructor.name, "merged" if merged else "stuck")
    return merged


def prove_by_induction(conj: Conjecture, rules: RuleSet, limits: SearchLimits = SearchLimits()) -> ProofResult:
    """Induct on the first placeholder of each datatype in turn; every case must merge."""
    try:
        lemma_rules = compile_equation(conj.equation(), RuleOrigin.LEMMA)
    except RuleError as exc:
        return ProofFailure(conj, str(exc))
    present = set(conj.placeholders())
    failure = ProofFailure(conj, "no placeholder of a datatype")
    for datatype in rules.datatypes.values():
        if placeholder(1, datatype.sort).head not in present:
            continue
        obligation = build_obligation(conj, datatype)
        stuck = next((c for c in obligation.cases if not _discharge(c, rules, limits)), None)
        if stuck is None:
            logger.debug("proved %s by induction on %s", conj, datatype.sort)
            return Lemma(conj.equation(), lemma_rules, conj, conj)
        failure = ProofFailure(conj, "case not closed", str(datatype.sort), stuck.constructor.name)
    return failure


def check_no_induction(conj: Conjecture, rules: RuleSet, limits: SearchLimits = SearchLimits()) -> bool:
    """True when rewriting (with case splits) alone merges both sides."""
    g = EGraph()
    a, b = g.add(conj.lhs), g.add(conj.rhs)
    if a == b:
        return True
    try:
        limits.search(g, rules, target=(a, b))
    except SaturationAbort as exc:
        logger.warning("%s: %s", conj, exc)
    return g.equiv(a, b)


def prove(conj: Conjecture, rules: RuleSet, limits: SearchLimits = SearchLimits()) -> ProofResult:
    """Try the generalizations of ``conj`` in order; the lemma keeps ``conj`` as its origin."""
    result: ProofResult = ProofFailure(conj, "no variant")
    for variant in generalize(conj):
        result = prove_by_induction(variant, rules, limits)
        if isinstance(result, Lemma):
            result.conjecture = conj
            conj.status = ConjectureStatus.PROVED
            return result
    conj.status = ConjectureStatus.FAILED
    return result
