"""Syntax-guided enumeration of placeholder terms straight into an e-graph."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Union

from Agents.Parseragent.terms import (
    ExplorationError,
    Sort,
    SymbolKind,
    Term,
    Theory,
    funref,
    placeholder,
)
from Agents.Rewriteagent.egraph import EGraph, ENode

logger = logging.getLogger(__name__)

DEFAULT_TERM_DEPTH = 2
DEFAULT_PLACEHOLDERS = 2

# Operator kinds that never show up in an enumerated term.
HIDDEN_KINDS = frozenset({SymbolKind.MATCHER, SymbolKind.UNINTERPRETED})


class EnumerationError(ExplorationError):
    pass


PlaceholderCount = Union[int, Mapping[str, int]]


@dataclass
class EnumState:
    theory: Theory
    egraph: EGraph
    k: int = DEFAULT_TERM_DEPTH
    level: int = 0
    frontier: List[int] = field(default_factory=list)
    placeholders: Dict[Sort, List[Term]] = field(default_factory=dict)
    enumerated: Dict[int, None] = field(default_factory=dict)

    def classes(self) -> List[int]:
        """Canonical ids of every class holding an enumerated term."""
        g = self.egraph
        return sorted({g.find(c) for c in self.enumerated})

    def placeholder(self, sort: Sort, index: int = 1) -> Optional[Term]:
        found = self.placeholders.get(sort, [])
        return found[index - 1] if len(found) >= index else None


def placeholder_sorts(theory: Theory) -> List[Sort]:
    """Every sort used as an argument of a symbol, in declaration order."""
    seen: Dict[Sort, None] = {}
    for f in theory.funcs:
        seen.update(dict.fromkeys(f.arg_sorts))
    return list(seen)


def count_for(ph_count: PlaceholderCount, sort: Sort, default: int = DEFAULT_PLACEHOLDERS) -> int:
    if isinstance(ph_count, int):
        return ph_count
    return ph_count.get(str(sort), ph_count.get("*", default))


def init_enum(theory: Theory, ph_count: PlaceholderCount = DEFAULT_PLACEHOLDERS, k: int = DEFAULT_TERM_DEPTH) -> EnumState:
    """Level 0: every nullary symbol, function constant and placeholder as its own class."""
    g = EGraph()
    state = EnumState(theory, g, k)
    leaves: List[Term] = [f() for f in theory.funcs if f.arity == 0]
    leaves.extend(funref(f) for f in theory.fun_refs)
    for sort in placeholder_sorts(theory):
        phs = [placeholder(i, sort) for i in range(1, count_for(ph_count, sort) + 1)]
        state.placeholders[sort] = phs
        leaves.extend(phs)
    for term in leaves:
        cid = g.add(term)
        state.enumerated[cid] = None
        state.frontier.append(cid)
    logger.info("level=0 classes=%d nodes=%d", len(state.classes()), g.node_count)
    return state


def grow(state: EnumState) -> int:
    """Apply every non-nullary symbol to argument tuples touching the frontier."""
    if state.level >= state.k:
        raise EnumerationError(f"term depth {state.k} already reached")
    g = state.egraph
    g.rebuild()
    frontier = {g.find(c) for c in state.frontier}
    known = state.classes()
    by_sort: Dict[Sort, List[int]] = {}
    for cid in known:
        by_sort.setdefault(g.sort_of(cid), []).append(cid)
    before = set(known)
    created: Dict[int, None] = {}
    for f in state.theory.funcs:
        if f.arity == 0:
            continue
        for args in itertools.product(*(by_sort.get(s, []) for s in f.arg_sorts)):
            if not frontier.intersection(args):
                continue
            cid = g.add_node(ENode(f.symbol, tuple(args)))
            state.enumerated[cid] = None
            if cid not in before:
                created[cid] = None
    state.level += 1
    state.frontier = list(created)
    logger.info("level=%d classes=%d nodes=%d", state.level, len(state.classes()), g.node_count)
    return len(created)


def representatives(state: EnumState) -> Dict[int, Term]:
    """Smallest enumerated-form term of every enumerated class."""
    g = state.egraph
    g.rebuild()
    return {cid: g.extract_min(cid, HIDDEN_KINDS) for cid in state.classes()}
