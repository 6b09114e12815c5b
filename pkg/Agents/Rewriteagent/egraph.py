"""Hash-consed e-graph with deferred congruence closure and incremental e-matching."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from Agents.Parseragent.terms import (
    ExplorationError,
    Sort,
    Symbol,
    SymbolKind,
    Term,
    uninterpreted,
)

logger = logging.getLogger(__name__)

Substitution = Dict[Symbol, int]


class EGraphError(ExplorationError):
    pass


@dataclass(frozen=True)
class ENode:
    op: Symbol
    children: Tuple[int, ...] = ()

    def __str__(self) -> str:
        name = "@" if self.op.kind is SymbolKind.APPLY else str(self.op)
        if not self.children:
            return name
        return f"{name}(" + ", ".join(f"c{c}" for c in self.children) + ")"


@dataclass
class EClass:
    id: int
    sort: Sort
    nodes: List[ENode] = field(default_factory=list)
    parents: List[Tuple[ENode, int]] = field(default_factory=list)


class EGraph:
    def __init__(self):
        self._uf: List[int] = []
        self._size: List[int] = []
        self.memo: Dict[ENode, int] = {}
        self.classes: Dict[int, EClass] = {}
        self.births: Dict[ENode, int] = {}
        self.pending: List[int] = []
        self.tick = 0
        self.fresh_counter = itertools.count(1)
        self._version = 0
        self._index: Optional[Tuple[int, Dict[Symbol, List[int]]]] = None
        self._best: Dict[FrozenSet[SymbolKind], Tuple[int, Dict[int, Term]]] = {}

    # union-find ---------------------------------------------------------

    def find(self, cid: int) -> int:
        root = cid
        while self._uf[root] != root:
            root = self._uf[root]
        while self._uf[cid] != root:
            self._uf[cid], cid = root, self._uf[cid]
        return root

    def equiv(self, a: int, b: int) -> bool:
        return self.find(a) == self.find(b)

    def canonicalize(self, node: ENode) -> ENode:
        return ENode(node.op, tuple(self.find(c) for c in node.children))

    # construction ---------------------------------------------------------

    def add(self, term: Term) -> int:
        if term.cases:
            raise EGraphError(f"surface match cannot be stored: {term}")
        children = tuple(self.add(a) for a in term.args)
        return self.add_node(ENode(term.head, children))

    def add_node(self, node: ENode) -> int:
        node = self.canonicalize(node)
        existing = self.memo.get(node)
        if existing is not None:
            return self.find(existing)
        cid = len(self._uf)
        self._uf.append(cid)
        self._size.append(1)
        self.classes[cid] = EClass(cid, node.op.sort, [node])
        for child in node.children:
            self.classes[child].parents.append((node, cid))
        self.memo[node] = cid
        self.tick += 1
        self.births[node] = self.tick
        self._version += 1
        return cid

    def fresh_leaf(self, sort: Sort, prefix: str = "sk") -> Term:
        """An uninterpreted constant not yet used in this graph or any of its copies."""
        return uninterpreted(f"{prefix}{next(self.fresh_counter)}", sort)

    def lookup(self, term: Term) -> Optional[int]:
        """Class of ``term`` if it is already represented, without adding it."""
        children = []
        for arg in term.args:
            cid = self.lookup(arg)
            if cid is None:
                return None
            children.append(cid)
        found = self.memo.get(self.canonicalize(ENode(term.head, tuple(children))))
        return None if found is None else self.find(found)

    def merge(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        ca, cb = self.classes[a], self.classes[b]
        if ca.sort != cb.sort:
            raise EGraphError(f"cannot merge class {a} of sort {ca.sort} with class {b} of sort {cb.sort}")
        if self._size[a] < self._size[b]:
            a, b, ca, cb = b, a, cb, ca
        self._uf[b] = a
        self._size[a] += self._size[b]
        ca.nodes.extend(cb.nodes)
        ca.parents.extend(cb.parents)
        del self.classes[b]
        self.pending.append(a)
        self._version += 1
        return a

    def rebuild(self) -> int:
        """Restore congruence; returns the number of class merges it performed."""
        merges = 0
        touched: Dict[int, None] = {}
        if self.pending:
            self.tick += 1
        while self.pending:
            todo = sorted({self.find(c) for c in self.pending})
            self.pending = []
            for cid in todo:
                touched[cid] = None
                merges += self._repair(self.find(cid), touched)
        for cid in {self.find(c) for c in touched}:
            cls = self.classes[cid]
            cls.nodes = list(dict.fromkeys(self.canonicalize(n) for n in cls.nodes))
        if touched:
            self._version += 1
        return merges

    def _repair(self, cid: int, touched: Dict[int, None]) -> int:
        merges = 0
        cls = self.classes[cid]
        parents = list(cls.parents)
        for node, owner in parents:
            self.memo.pop(node, None)
            canon = self.canonicalize(node)
            self.memo[canon] = self.find(owner)
            if canon != node:
                self.births.pop(node, None)
            # parents of a merged class count as new for incremental matching
            self.births[canon] = self.tick
        fresh: Dict[ENode, int] = {}
        for node, owner in parents:
            canon = self.canonicalize(node)
            if canon in fresh and not self.equiv(fresh[canon], owner):
                self.merge(fresh[canon], owner)
                merges += 1
            fresh[canon] = self.find(owner)
            touched[fresh[canon]] = None
        if self.find(cid) == cid:
            # parents of classes absorbed meanwhile stay queued; the root is pending again
            cls.parents = list(fresh.items()) + cls.parents[len(parents):]
        return merges

    # queries --------------------------------------------------------------

    def class_ids(self) -> List[int]:
        return sorted(self.classes)

    def sort_of(self, cid: int) -> Sort:
        return self.classes[self.find(cid)].sort

    def nodes(self, cid: int) -> List[ENode]:
        return self.classes[self.find(cid)].nodes

    @property
    def node_count(self) -> int:
        return len(self.memo)

    def birth(self, node: ENode) -> int:
        return self.births.get(self.canonicalize(node), 0)

    def has_constructor(self, cid: int) -> bool:
        return any(n.op.is_constructor for n in self.nodes(cid))

    def classes_with_op(self, op: Symbol) -> List[int]:
        if self._index is None or self._index[0] != self._version:
            index: Dict[Symbol, List[int]] = {}
            for cid in self.class_ids():
                for node in self.classes[cid].nodes:
                    ids = index.setdefault(node.op, [])
                    if not ids or ids[-1] != cid:
                        ids.append(cid)
            self._index = (self._version, index)
        return self._index[1].get(op, [])

    # e-matching -----------------------------------------------------------

    def ematch(self, pattern: Term, since: int = 0) -> List[Tuple[Substitution, int]]:
        """All matches of ``pattern`` that use at least one node born after ``since``."""
        found: List[Tuple[Substitution, int]] = []
        if pattern.head.kind is SymbolKind.VARIABLE:
            for cid in self.class_ids():
                cls = self.classes[cid]
                if cls.sort == pattern.sort and any(self.births.get(n, 0) > since for n in cls.nodes):
                    found.append(({pattern.head: cid}, cid))
            return found
        for cid in self.classes_with_op(pattern.head):
            for subst, fresh in self._match(pattern, cid, {}, since):
                if fresh:
                    found.append((subst, cid))
        return found

    def _match(self, pattern: Term, cid: int, subst: Substitution, since: int) -> Iterator[Tuple[Substitution, bool]]:
        if pattern.head.kind is SymbolKind.VARIABLE:
            bound = subst.get(pattern.head)
            if bound is None:
                if self.sort_of(cid) == pattern.sort:
                    yield {**subst, pattern.head: cid}, False
            elif bound == cid:
                yield subst, False
            return
        for node in list(self.classes[cid].nodes):
            if node.op != pattern.head or len(node.children) != len(pattern.args):
                continue
            fresh = self.births.get(node, 0) > since
            for inner, inner_fresh in self._match_args(pattern.args, node.children, 0, subst, since):
                yield inner, fresh or inner_fresh

    def _match_args(self, pats: Sequence[Term], children: Sequence[int], i: int, subst: Substitution, since: int):
        if i == len(pats):
            yield subst, False
            return
        for first, fresh in self._match(pats[i], self.find(children[i]), subst, since):
            for rest, rest_fresh in self._match_args(pats, children, i + 1, first, since):
                yield rest, fresh or rest_fresh

    def instantiate(self, pattern: Term, subst: Substitution) -> int:
        """Add ``pattern`` with its variables bound by ``subst``; returns the class."""
        if pattern.head.kind is SymbolKind.VARIABLE:
            return self.find(subst[pattern.head])
        children = tuple(self.instantiate(a, subst) for a in pattern.args)
        return self.add_node(ENode(pattern.head, children))

    # extraction -----------------------------------------------------------

    def _best_terms(self, exclude: FrozenSet[SymbolKind]) -> Dict[int, Term]:
        cached = self._best.get(exclude)
        if cached is not None and cached[0] == self._version:
            return cached[1]
        best: Dict[int, Term] = {}
        changed = True
        ids = self.class_ids()
        while changed:
            changed = False
            for cid in ids:
                for node in self.classes[cid].nodes:
                    if node.op.kind in exclude:
                        continue
                    kids = [best.get(self.find(c)) for c in node.children]
                    if any(k is None for k in kids):
                        continue
                    candidate = Term(node.op, tuple(kids))
                    current = best.get(cid)
                    if current is None or candidate.order_key < current.order_key:
                        best[cid] = candidate
                        changed = True
        self._best[exclude] = (self._version, best)
        return best

    def extract_min(self, cid: int, exclude: Iterable[SymbolKind] = ()) -> Term:
        """A minimum-size term of the class, ties broken by free variables, then text.

        The size is exactly minimal among terms the class represents. The
        tie-break is greedy: each child class contributes its own best term, so
        a tie between two parents is settled on those children and not over
        every term of equal size. Nodes whose operator kind is in ``exclude``
        are never used.
        """
        term = self._best_terms(frozenset(exclude)).get(self.find(cid))
        if term is None:
            raise EGraphError(f"class {cid} has no finite representative")
        return term

    # copies and dumps -----------------------------------------------------

    def clone(self) -> "EGraph":
        copy = EGraph.__new__(EGraph)
        copy._uf = list(self._uf)
        copy._size = list(self._size)
        copy.memo = dict(self.memo)
        copy.classes = {
            cid: EClass(cid, c.sort, list(c.nodes), list(c.parents)) for cid, c in self.classes.items()
        }
        copy.births = dict(self.births)
        copy.pending = list(self.pending)
        copy.tick = self.tick
        # one counter for the original and all of its copies
        copy.fresh_counter = self.fresh_counter
        copy._version = self._version
        copy._index = None
        copy._best = {}
        return copy

    def partition(self, ids: Iterable[int]) -> Dict[int, int]:
        return {cid: self.find(cid) for cid in ids}

    def dump(self) -> str:
        lines = []
        for cid in self.class_ids():
            cls = self.classes[cid]
            nodes = sorted(str(self.canonicalize(n)) for n in cls.nodes)
            lines.append(f"c{cid} : {cls.sort} = " + " | ".join(nodes))
        return "\n".join(lines)

    def to_dot(self) -> str:
        out = ["digraph egraph {", "  compound=true;"]
        for cid in self.class_ids():
            out.append(f'  subgraph cluster_{cid} {{ label="c{cid}";')
            for i, node in enumerate(self.classes[cid].nodes):
                label = "@" if node.op.kind is SymbolKind.APPLY else str(node.op)
                out.append(f'    n{cid}_{i} [label="{label}"];')
            out.append("  }")
        for cid in self.class_ids():
            for i, node in enumerate(self.classes[cid].nodes):
                for child in node.children:
                    out.append(f"  n{cid}_{i} -> n{self.find(child)}_0 [lhead=cluster_{self.find(child)}];")
        out.append("}")
        return "\n".join(out)
