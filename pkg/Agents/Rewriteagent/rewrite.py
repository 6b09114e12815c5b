"""Rewrite rules over the e-graph: compilation, bounded saturation and case splits."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import AbstractSet, Dict, Iterable, List, Optional, Sequence, Tuple

from Agents.Parseragent.terms import (
    Datatype,
    Equation,
    ExplorationError,
    Sort,
    Symbol,
    SymbolKind,
    Term,
    Theory,
    var,
)

from .egraph import EGraph

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 8
DEFAULT_SPLIT_DEPTH = 2
DEFAULT_NODE_CAP = 150_000


class RuleError(ExplorationError):
    pass


class SaturationAbort(ExplorationError):
    """The node cap was hit; every merge performed before that is still valid."""

    def __init__(self, merges: int, nodes: int):
        super().__init__(f"saturation aborted at {nodes} e-nodes after {merges} merges")
        self.merges = merges
        self.nodes = nodes


class SearchTimeout(ExplorationError):
    """The wall-clock deadline passed in the middle of a search."""


def check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise SearchTimeout("deadline passed during rewrite search")


class RuleOrigin(str, Enum):
    DEFINITION = "definition"
    LEMMA = "lemma"
    INDUCTION_HYPOTHESIS = "induction-hypothesis"


@dataclass(frozen=True)
class RewriteRule:
    name: str
    premise: Term
    conclusion: Term
    origin: RuleOrigin = RuleOrigin.DEFINITION
    # forward definition rules only; lemmas and hypotheses never trigger a case split
    splits: bool = False
    # induction hypotheses: the fresh leaf for the smaller argument, required in the premise
    wf_guard: Optional[Term] = None

    def __post_init__(self):
        if self.premise.sort != self.conclusion.sort:
            raise RuleError(f"rule {self.name}: premise and conclusion differ in sort")
        missing = set(self.conclusion.free_vars) - set(self.premise.free_vars)
        if missing:
            names = ", ".join(sorted(s.name for s in missing))
            raise RuleError(f"rule {self.name}: conclusion variables {names} do not occur in the premise")
        if self.wf_guard is not None and self.wf_guard.head not in set(self.premise.symbols()):
            raise RuleError(f"rule {self.name}: premise does not mention its guard {self.wf_guard}")

    def __str__(self) -> str:
        return f"{self.name}: {self.premise} => {self.conclusion}"


@dataclass
class RuleSet:
    rules: List[RewriteRule] = field(default_factory=list)
    datatypes: Dict[Sort, Datatype] = field(default_factory=dict)

    def extend(self, rules: Iterable[RewriteRule]) -> "RuleSet":
        return RuleSet(self.rules + list(rules), self.datatypes)

    def __len__(self) -> int:
        return len(self.rules)


@dataclass(frozen=True)
class SearchLimits:
    """Budget of one rewrite search, shared by inference, proving and screening."""

    depth: int = DEFAULT_DEPTH
    case_split: bool = True
    split_depth: int = DEFAULT_SPLIT_DEPTH
    node_cap: int = DEFAULT_NODE_CAP
    trace: bool = False
    # absolute time.monotonic() value; None searches without a clock
    deadline: Optional[float] = None

    def search(self, g: "EGraph", rules: "RuleSet", target: Optional[Tuple[int, int]] = None) -> int:
        return rewrite_search(
            g,
            rules,
            self.depth,
            self.case_split,
            self.split_depth,
            0,
            self.node_cap,
            self.trace,
            target,
            deadline=self.deadline,
        )

    def saturate(self, g: "EGraph", rules: "RuleSet") -> int:
        """Plain saturation, no case splits."""
        return run_rewrites(g, rules.rules, self.depth, self.node_cap, self.trace, deadline=self.deadline)

    def check_deadline(self) -> None:
        check_deadline(self.deadline)


@dataclass(frozen=True)
class CaseSplit:
    scrutinee: int
    datatype: Datatype
    alternatives: Tuple[Term, ...]
    depth: int = 0

    @property
    def sort(self) -> Sort:
        return self.datatype.sort


# compilation ----------------------------------------------------------------


def lift_matches(eq: Equation) -> List[Equation]:
    """Replace every ``match`` by a matcher symbol plus one equation per arm.

    The matcher takes the scrutinee first and then the free variables of the
    arms, so each arm equation keeps its variables in the premise.
    """
    extra: List[Equation] = []
    base = eq.name or "eq"
    counter = [0]

    def lift(term: Term) -> Term:
        if term.is_leaf:
            return term
        if term.head.kind is not SymbolKind.MATCH:
            return Term(term.head, tuple(lift(a) for a in term.args))
        scrutinee = lift(term.args[0])
        arm_vars: Dict[Symbol, None] = {}
        for pattern, body in zip(term.cases, term.args[1:]):
            bound = set(pattern.free_vars)
            arm_vars.update(dict.fromkeys(v for v in body.free_vars if v not in bound))
        counter[0] += 1
        matcher = Symbol(f"{base}-match{counter[0]}", term.sort, SymbolKind.MATCHER)
        params = tuple(Term(v) for v in arm_vars)
        for pattern, body in zip(term.cases, term.args[1:]):
            lhs = Term(matcher, (pattern,) + params)
            rhs = lift(body)
            used = tuple((s.name, s.sort) for s in lhs.free_vars)
            extra.append(Equation(lhs, rhs, used, f"{matcher.name}.{pattern.head.name}"))
        return Term(matcher, (scrutinee,) + params)

    main = Equation(lift(eq.lhs), lift(eq.rhs), eq.vars, eq.name)
    return [main] + extra


def _directions(eq: Equation, origin: RuleOrigin, wf_guard: Optional[Term] = None) -> List[RewriteRule]:
    """Both orientations whose conclusion keeps to the premise's variables.

    A lone variable never becomes a premise: it would match every class.
    With a guard, only orientations whose premise mentions it are kept.
    """
    lhs_vars, rhs_vars = set(eq.lhs.free_vars), set(eq.rhs.free_vars)
    name = eq.name or str(eq)
    rules = []
    for suffix, premise, conclusion, vars_ok in (
        ("", eq.lhs, eq.rhs, lhs_vars >= rhs_vars),
        (".rev", eq.rhs, eq.lhs, rhs_vars >= lhs_vars),
    ):
        if not vars_ok or premise.head.is_free_var:
            continue
        if wf_guard is not None and wf_guard.head not in set(premise.symbols()):
            continue
        splits = origin is RuleOrigin.DEFINITION and not suffix
        rules.append(RewriteRule(f"{name}{suffix}", premise, conclusion, origin, splits, wf_guard))
    if not rules:
        raise RuleError(f"no usable direction for {eq}: {name}")
    return rules


def compile_equation(
    eq: Equation,
    origin: RuleOrigin = RuleOrigin.DEFINITION,
    wf_guard: Optional[Term] = None,
) -> List[RewriteRule]:
    """Rules for every admissible direction of ``eq`` (and of its lifted match arms)."""
    rules: List[RewriteRule] = []
    for part in lift_matches(eq):
        rules.extend(_directions(part, origin, wf_guard))
    return rules


def compile_theory(theory: Theory, extra: Iterable[Equation] = (), origin: RuleOrigin = RuleOrigin.LEMMA) -> RuleSet:
    rules: List[RewriteRule] = []
    for eq in theory.eqs:
        rules.extend(compile_equation(eq, RuleOrigin.DEFINITION))
    for eq in extra:
        rules.extend(compile_equation(eq, origin))
    return RuleSet(rules, theory.datatype_map())


# saturation -----------------------------------------------------------------


def run_rewrites(
    g: EGraph,
    rules: Sequence[RewriteRule],
    depth: int = DEFAULT_DEPTH,
    node_cap: int = DEFAULT_NODE_CAP,
    trace: bool = False,
    target: Optional[Tuple[int, int]] = None,
    deadline: Optional[float] = None,
) -> int:
    """Apply every rule for ``depth`` rounds or until a round merges nothing.

    Each round matches all rules against the graph as it stood at the start
    of the round, then adds every conclusion, merges it with the matched
    root and rebuilds. Matching is incremental after the first round.
    Raises SearchTimeout between rounds once ``deadline`` has passed.
    """
    total = 0
    since = 0
    g.rebuild()
    for iteration in range(1, depth + 1):
        if target is not None and g.equiv(*target):
            break
        check_deadline(deadline)
        matches = []
        for rule in rules:
            for subst, root in g.ematch(rule.premise, since):
                matches.append((rule, subst, root))
        since = g.tick
        merges = 0
        for rule, subst, root in matches:
            cid = g.instantiate(rule.conclusion, subst)
            if not g.equiv(cid, root):
                g.merge(cid, root)
                merges += 1
                if trace:
                    logger.debug("iter=%d rule=%s root=%d", iteration, rule.name, g.find(root))
            if g.node_count > node_cap:
                g.rebuild()
                logger.warning("node cap %d reached in round %d", node_cap, iteration)
                raise SaturationAbort(total + merges, g.node_count)
        merges += g.rebuild()
        total += merges
        if merges == 0:
            break
    return total


# case splits ----------------------------------------------------------------


def _split_for(g: EGraph, cid: int, rules: RuleSet, depth: int) -> Optional[CaseSplit]:
    cid = g.find(cid)
    datatype = rules.datatypes.get(g.sort_of(cid))
    if datatype is None or g.has_constructor(cid):
        return None
    alternatives = tuple(
        ctor(*(g.fresh_leaf(s) for s in ctor.arg_sorts)) for ctor in datatype.constructors
    )
    return CaseSplit(cid, datatype, alternatives, depth)


def _constructor_positions(pattern: Term, path: Tuple[int, ...] = ()) -> List[Tuple[int, ...]]:
    found = []
    for i, arg in enumerate(pattern.args):
        if arg.head.is_constructor:
            found.append(path + (i,))
        found.extend(_constructor_positions(arg, path + (i,)))
    return found


def _replace_at(pattern: Term, path: Tuple[int, ...], replacement: Term) -> Term:
    if not path:
        return replacement
    i = path[0]
    args = list(pattern.args)
    args[i] = _replace_at(args[i], path[1:], replacement)
    return Term(pattern.head, tuple(args))


def _subpattern(pattern: Term, path: Tuple[int, ...]) -> Term:
    for i in path:
        pattern = pattern.args[i]
    return pattern


def detect_blocked_splits(g: EGraph, rules: RuleSet, depth: int = 0) -> List[CaseSplit]:
    """Classes whose lack of a constructor is the only thing stopping a rule.

    Two kinds qualify: the scrutinee of a matcher node, which only exists once
    its definition rule has fired, and the one blocked constructor argument
    of a forward definition rule that needs several constructor patterns.
    """
    g.rebuild()
    candidates: Dict[int, None] = {}
    for cid in g.class_ids():
        for node in g.nodes(cid):
            if node.op.kind is SymbolKind.MATCHER and node.children:
                candidates[g.find(node.children[0])] = None
    for rule in rules.rules:
        if not rule.splits:
            continue
        positions = _constructor_positions(rule.premise)
        if len(positions) < 2:
            continue
        for path in positions:
            hole = var("_split", _subpattern(rule.premise, path).sort)
            for subst, _ in g.ematch(_replace_at(rule.premise, path, hole)):
                candidates[g.find(subst[hole.head])] = None
    splits = []
    for cid in sorted(candidates):
        split = _split_for(g, cid, rules, depth)
        if split is not None:
            splits.append(split)
    return splits


def apply_split(
    g: EGraph,
    split: CaseSplit,
    rules: RuleSet,
    depth: int = DEFAULT_DEPTH,
    max_split_depth: int = DEFAULT_SPLIT_DEPTH,
    node_cap: int = DEFAULT_NODE_CAP,
    trace: bool = False,
    deadline: Optional[float] = None,
    exclude: AbstractSet[int] = frozenset(),
) -> int:
    """Rewrite one copy per constructor and keep the merges every copy agrees on.

    Classes in ``exclude`` were split at an outer level and are not split
    again inside the copies.
    """
    if split.depth >= max_split_depth:
        return 0
    g.rebuild()
    originals = g.class_ids()
    labels: Dict[int, Tuple[int, ...]] = {cid: () for cid in originals}
    for alternative in split.alternatives:
        check_deadline(deadline)
        branch = g.clone()
        branch.merge(branch.add(alternative), split.scrutinee)
        try:
            rewrite_search(
                branch,
                rules,
                depth,
                True,
                max_split_depth,
                split.depth + 1,
                node_cap,
                trace,
                deadline=deadline,
                exclude=exclude,
            )
        except SaturationAbort as exc:
            logger.warning("case %s of class %d: %s", alternative, split.scrutinee, exc)
        for cid in originals:
            labels[cid] += (branch.find(cid),)
    cells: Dict[Tuple[int, ...], List[int]] = {}
    for cid in originals:
        cells.setdefault(labels[cid], []).append(cid)
    merges = 0
    for members in cells.values():
        for other in members[1:]:
            if not g.equiv(members[0], other):
                g.merge(members[0], other)
                merges += 1
    merges += g.rebuild()
    if merges:
        logger.debug("split on class %d (%s) merged %d classes", split.scrutinee, split.sort, merges)
    return merges


def rewrite_search(
    g: EGraph,
    rules: RuleSet,
    depth: int = DEFAULT_DEPTH,
    case_split: bool = True,
    max_split_depth: int = DEFAULT_SPLIT_DEPTH,
    split_depth: int = 0,
    node_cap: int = DEFAULT_NODE_CAP,
    trace: bool = False,
    target: Optional[Tuple[int, int]] = None,
    deadline: Optional[float] = None,
    exclude: AbstractSet[int] = frozenset(),
) -> int:
    """Saturate, then split on blocked scrutinees, then saturate again if a split helped."""
    merges = run_rewrites(g, rules.rules, depth, node_cap, trace, target, deadline)
    if not case_split or split_depth >= max_split_depth:
        return merges
    if target is not None and g.equiv(*target):
        return merges
    excluded = {g.find(c) for c in exclude}
    splits = [s for s in detect_blocked_splits(g, rules, split_depth) if s.scrutinee not in excluded]
    inner = frozenset(exclude) | {s.scrutinee for s in splits}
    gained = 0
    for split in splits:
        if g.has_constructor(split.scrutinee):
            continue
        gained += apply_split(g, split, rules, depth, max_split_depth, node_cap, trace, deadline, inner)
        if target is not None and g.equiv(*target):
            break
    if gained:
        gained += run_rewrites(g, rules.rules, depth, node_cap, trace, target, deadline)
    return merges + gained
