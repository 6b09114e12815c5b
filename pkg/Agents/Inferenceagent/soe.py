"""Conjecture inference by symbolic observational equivalence, plus screening."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Sequence, Tuple

from Agents.Generationagent.sygue import HIDDEN_KINDS, EnumState, representatives
from Agents.Parseragent.terms import (
    Datatype,
    Equation,
    ExplorationError,
    Sort,
    Symbol,
    SymbolKind,
    Term,
    as_placeholders,
    placeholder,
    substitute,
    to_equation,
    uninterpreted,
)
from Agents.Rewriteagent.egraph import EGraph
from Agents.Rewriteagent.rewrite import RuleSet, SaturationAbort, SearchLimits

logger = logging.getLogger(__name__)

DEFAULT_EXAMPLE_DEPTH = 2


class ExampleError(ExplorationError):
    pass


class ConjectureStatus(str, Enum):
    PENDING = "pending"
    PROVED = "proved"
    FAILED = "failed"
    REDUNDANT = "redundant"


def term_order_leq(t1: Term, t2: Term) -> bool:
    """Smaller size first, then more free variables, then text."""
    return t1.order_key <= t2.order_key


def normalize(lhs: Term, rhs: Term) -> Tuple[Term, Term]:
    """Renumber placeholders per sort in order of first occurrence, lhs first."""
    counters: Dict[Sort, int] = {}
    mapping: Dict[Symbol, Term] = {}
    for term in (lhs, rhs):
        for sym in term.free_vars:
            if sym.kind is SymbolKind.PLACEHOLDER and sym not in mapping:
                counters[sym.sort] = counters.get(sym.sort, 0) + 1
                mapping[sym] = placeholder(counters[sym.sort], sym.sort)
    return substitute(lhs, mapping), substitute(rhs, mapping)


@dataclass(eq=False)
class Conjecture:
    lhs: Term
    rhs: Term
    status: ConjectureStatus = ConjectureStatus.PENDING

    @classmethod
    def make(cls, a: Term, b: Term) -> "Conjecture":
        """Oriented (smaller side left) and with normalized placeholder numbering.

        Both orientations are normalized first and the least valid one wins,
        so ``make(a, b)`` and ``make(b, a)`` give the same key.
        """
        options = [normalize(a, b), normalize(b, a)]
        valid = [o for o in options if term_order_leq(*o)] or options
        return cls(*min(valid, key=lambda o: (o[0].order_key, o[1].order_key)))

    @property
    def order_key(self) -> Tuple[int, int, str]:
        fv = dict.fromkeys(self.lhs.free_vars + self.rhs.free_vars)
        return (self.lhs.size + self.rhs.size, -len(fv), self.key)

    @property
    def key(self) -> str:
        return f"{self.lhs.sexp} = {self.rhs.sexp}"

    def placeholders(self) -> List[Symbol]:
        return [s for s in dict.fromkeys(self.lhs.free_vars + self.rhs.free_vars) if s.kind is SymbolKind.PLACEHOLDER]

    def equation(self, name: str = "") -> Equation:
        return to_equation(self.lhs, self.rhs, name)

    def __str__(self) -> str:
        return self.key


def make_examples(datatype: Datatype, depth: int = DEFAULT_EXAMPLE_DEPTH) -> List[Term]:
    """Constructor trees up to ``depth`` nested recursive constructors.

    Leaves are fresh uninterpreted constants ``v1``, ``v2``..., numbered inner
    arguments first, so the list examples read ``[]``, ``v1::[]``, ``v2::v1::[]``.
    """
    if not datatype.base_constructors:
        raise ExampleError(f"datatype {datatype.sort} has no base constructor")
    # shapes: constructor trees with None where a fresh leaf goes
    by_depth: List[List[tuple]] = [[(c, ()) for c in datatype.base_constructors]]
    for _ in range(depth):
        smaller = [s for shapes in by_depth for s in shapes]
        newest = by_depth[-1]
        shapes = []
        for ctor in datatype.constructors:
            if not datatype.is_recursive(ctor):
                continue
            slots = [smaller if s == datatype.sort else [None] for s in ctor.arg_sorts]
            for args in itertools.product(*slots):
                if any(a in newest for a in args if a is not None):
                    shapes.append((ctor, args))
        by_depth.append(shapes)

    def build(shape, counter) -> Term:
        ctor, args = shape
        built = [None] * len(args)
        for i, arg in enumerate(args):
            if arg is not None:
                built[i] = build(arg, counter)
        for i, arg in enumerate(args):
            if arg is None:
                built[i] = uninterpreted(f"v{next(counter)}", ctor.arg_sorts[i])
        return ctor(*built)

    examples = []
    for shapes in by_depth:
        for shape in shapes:
            examples.append(build(shape, itertools.count(1)))
    return examples


def infer_conjectures(
    state: EnumState,
    rules: RuleSet,
    limits: SearchLimits = SearchLimits(),
    example_depth: int = DEFAULT_EXAMPLE_DEPTH,
) -> List[Conjecture]:
    """Pairs of enumerated classes that merge under every symbolic example of a first placeholder."""
    g = state.egraph
    g.rebuild()
    originals = state.classes()
    reps = representatives(state)
    found: Dict[str, Conjecture] = {}
    for datatype in state.theory.datatypes:
        ph = state.placeholder(datatype.sort, 1)
        if ph is None:
            continue
        ph_class = g.lookup(ph)
        labels: Dict[int, Tuple[int, ...]] = {cid: () for cid in originals}
        for example in make_examples(datatype, example_depth):
            limits.check_deadline()
            copy = g.clone()
            copy.merge(copy.add(example), ph_class)
            try:
                limits.search(copy, rules)
            except SaturationAbort as exc:
                logger.warning("example %s for %s: %s", example, ph, exc)
            for cid in originals:
                labels[cid] += (copy.find(cid),)
        cells: Dict[Tuple[int, ...], List[int]] = {}
        for cid in originals:
            cells.setdefault(labels[cid], []).append(cid)
        for members in cells.values():
            for a, b in itertools.combinations(members, 2):
                if g.equiv(a, b):
                    continue
                conj = Conjecture.make(reps[a], reps[b])
                found.setdefault(conj.key, conj)
    result = sorted(found.values(), key=lambda c: c.order_key)
    logger.debug("inferred %d conjectures", len(result))
    return result


def screen(
    conjectures: Sequence[Conjecture],
    g: EGraph,
    rules: RuleSet,
    limits: SearchLimits = SearchLimits(),
) -> List[Conjecture]:
    """Drop what rewriting alone shows; normalize and order the rest."""
    if not conjectures:
        return []
    sides = [(g.add(c.lhs), g.add(c.rhs)) for c in conjectures]
    try:
        limits.saturate(g, rules)
    except SaturationAbort as exc:
        logger.warning("screening: %s", exc)
    kept: Dict[str, Conjecture] = {}
    for conj, (a, b) in zip(conjectures, sides):
        if g.equiv(a, b):
            conj.status = ConjectureStatus.REDUNDANT
            continue
        fresh = Conjecture.make(g.extract_min(a, HIDDEN_KINDS), g.extract_min(b, HIDDEN_KINDS))
        kept.setdefault(fresh.key, fresh)
    result = sorted(kept.values(), key=lambda c: c.order_key)
    if limits.trace:
        for conj in result:
            logger.debug("conjecture %s %s = %s", conj.order_key[:2], conj.lhs, conj.rhs)
    return result


def conjectures_from(equations: Iterable[Equation]) -> List[Conjecture]:
    """Goals or lemma files as conjectures over placeholders."""
    return [Conjecture(*as_placeholders(eq)) for eq in equations]
