"""The exploration loop: enumerate, infer, screen, prove, admit, repeat."""
from __future__ import annotations

import logging
import os
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from Agents.Generationagent.sygue import (
    DEFAULT_PLACEHOLDERS,
    DEFAULT_TERM_DEPTH,
    EnumState,
    grow,
    init_enum,
)
from Agents.Inferenceagent.soe import (
    DEFAULT_EXAMPLE_DEPTH,
    Conjecture,
    ConjectureStatus,
    conjectures_from,
    infer_conjectures,
    screen,
)
from Agents.Parseragent.smtlib import ParseError, parse_lemmas
from Agents.Parseragent.terms import Equation, ExplorationError, Theory
from Agents.Proveragent.prover import (
    Lemma,
    check_no_induction,
    induction_variants,
    prove,
    prove_by_induction,
)
from Agents.Rewriteagent.rewrite import (
    DEFAULT_DEPTH,
    DEFAULT_NODE_CAP,
    DEFAULT_SPLIT_DEPTH,
    RuleError,
    RuleOrigin,
    RuleSet,
    SaturationAbort,
    SearchLimits,
    SearchTimeout,
    compile_equation,
    compile_theory,
)

logger = logging.getLogger(__name__)

SEED_DIR_ENV = "THESY_SEED_DIR"
TIMEOUT_ENV = "THESY_TIMEOUT"
LEMMA_SUFFIX = ".lemmas.smt2"
PHASES = ("generation", "inference", "screening", "proving")


class ExplorationTimeout(SearchTimeout):
    pass


class ConfigError(ExplorationError):
    pass


@dataclass
class ExplorerConfig:
    term_depth: int = DEFAULT_TERM_DEPTH
    rw_depth: int = DEFAULT_DEPTH
    example_depth: int = DEFAULT_EXAMPLE_DEPTH
    split_depth: int = DEFAULT_SPLIT_DEPTH
    ph_count: int = DEFAULT_PLACEHOLDERS
    # per sort, keyed by the sort as written, e.g. {"Nat": 3}
    ph_overrides: Dict[str, int] = field(default_factory=dict)
    timeout: Optional[float] = None
    case_split: bool = True
    node_cap: int = DEFAULT_NODE_CAP
    trace: bool = False
    seed_dir: Optional[str] = None

    def __post_init__(self):
        numbers = [self.term_depth, self.rw_depth, self.example_depth, self.split_depth, self.ph_count, self.node_cap]
        numbers.extend(self.ph_overrides.values())
        if any(n < 0 for n in numbers) or (self.timeout is not None and self.timeout < 0):
            raise ConfigError("configuration values must be non-negative")

    @classmethod
    def from_env(cls, **overrides) -> "ExplorerConfig":
        """Defaults, then the environment, then explicit values that are not None."""
        values: Dict[str, object] = {}
        if os.getenv(SEED_DIR_ENV):
            values["seed_dir"] = os.getenv(SEED_DIR_ENV)
        if os.getenv(TIMEOUT_ENV):
            try:
                values["timeout"] = float(os.environ[TIMEOUT_ENV])
            except ValueError:
                logger.warning("ignoring %s=%r", TIMEOUT_ENV, os.environ[TIMEOUT_ENV])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def placeholders(self) -> Dict[str, int]:
        return {"*": self.ph_count, **self.ph_overrides}

    @property
    def limits(self) -> SearchLimits:
        return SearchLimits(self.rw_depth, self.case_split, self.split_depth, self.node_cap, self.trace)


@dataclass
class Stats:
    phase_times: Dict[str, float] = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))
    lemmas: List[str] = field(default_factory=list)
    conjectures: Dict[str, int] = field(
        default_factory=lambda: dict.fromkeys(("emitted", "screened", "proved", "failed", "retried"), 0)
    )
    truncated: bool = False

    def to_dict(self) -> dict:
        data = asdict(self)
        data["phase_times"] = {k: round(v, 3) for k, v in self.phase_times.items()}
        return data


@dataclass
class GoalResult:
    goal: str
    proved: bool = False
    time: float = 0.0


def load_seed_lemmas(theory: Theory, seed_dir: Optional[str]) -> Theory:
    """Append the lemmas of every ``*.lemmas.smt2`` in ``seed_dir`` that fits ``theory``."""
    if not seed_dir:
        return theory
    folder = Path(seed_dir)
    if not folder.is_dir():
        logger.warning("seed directory %s does not exist", folder)
        return theory
    seeds: List[Equation] = []
    for path in sorted(folder.glob(f"*{LEMMA_SUFFIX}")):
        try:
            seeds.extend(parse_lemmas(path.read_text(encoding="utf-8"), theory))
        except ParseError as exc:
            logger.warning("skipping seed file %s: %s", path.name, exc)
    if seeds:
        logger.info("loaded %d seed lemmas from %s", len(seeds), folder)
    return theory.with_equations(seeds)


class Session:
    """Mutable exploration state of one theory."""

    def __init__(self, theory: Theory, config: Optional[ExplorerConfig] = None):
        self.config = config or ExplorerConfig()
        self.theory = theory.with_equations([])
        self.rules: RuleSet = compile_theory(self.theory)
        self.state: EnumState = init_enum(self.theory, self.config.placeholders, self.config.term_depth)
        self.lemmas: List[Lemma] = []
        self.retry: List[Conjecture] = []
        self.attempted: Dict[str, ConjectureStatus] = {}
        self.stats = Stats()
        self.events: List[Dict[str, str]] = []
        self.on_admit: Optional[Callable[[Lemma], None]] = None
        self.done = False
        self.started = time.monotonic()
        self.deadline = None if self.config.timeout is None else self.started + self.config.timeout
        self.limits = replace(self.config.limits, deadline=self.deadline)

    # bookkeeping ------------------------------------------------------------

    def log_event(self, kind: str, detail: str) -> None:
        self.events.append({"event": kind, "detail": detail})
        logger.debug("%s %s", kind, detail)

    def check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ExplorationTimeout(f"timeout of {self.config.timeout}s reached")

    @contextmanager
    def phase(self, name: str):
        start = time.monotonic()
        try:
            yield
        finally:
            self.stats.phase_times[name] += time.monotonic() - start

    def saturate_master(self) -> None:
        try:
            self.limits.saturate(self.state.egraph, self.rules)
        except SaturationAbort as exc:
            logger.warning("enumeration graph: %s", exc)

    # main loop --------------------------------------------------------------

    def run(self) -> Tuple[List[Lemma], Stats]:
        try:
            self.check_deadline()
            with self.phase("generation"):
                self.saturate_master()
            while self.state.level < self.state.k and not self.done:
                with self.phase("generation"):
                    grow(self.state)
                    self.saturate_master()
                while not self.done and self.batch():
                    pass
        except SearchTimeout as exc:
            logger.warning("%s; returning %d lemmas", exc, len(self.lemmas))
            self.stats.truncated = True
        self.stats.lemmas = [str(lemma) for lemma in self.lemmas]
        return self.lemmas, self.stats

    def batch(self) -> bool:
        """One infer/screen/prove pass; True when a lemma was admitted."""
        self.check_deadline()
        with self.phase("inference"):
            inferred = infer_conjectures(self.state, self.rules, self.limits, self.config.example_depth)
        self.stats.conjectures["emitted"] += len(inferred)
        for conj in inferred:
            self.log_event("conjecture", conj.key)
        with self.phase("screening"):
            batch = screen(inferred, self.state.egraph, self.rules, self.limits)
        self.stats.conjectures["screened"] += len(inferred) - len(batch)
        admitted = False
        for conj in batch:
            if self.done:
                break
            self.check_deadline()
            if conj.key in self.attempted:
                continue
            self.attempted[conj.key] = ConjectureStatus.PENDING
            with self.phase("proving"):
                if check_no_induction(conj, self.rules, self.limits):
                    conj.status = ConjectureStatus.REDUNDANT
                    self.attempted[conj.key] = conj.status
                    self.stats.conjectures["screened"] += 1
                    self.log_event("redundant", conj.key)
                    continue
                result = prove(conj, self.rules, self.limits)
            self.attempted[conj.key] = conj.status
            if isinstance(result, Lemma):
                self.admit(result)
                admitted = True
            else:
                self.stats.conjectures["failed"] += 1
                self.retry.append(conj)
        return admitted

    def admit(self, lemma: Lemma) -> None:
        lemma.equation = Equation(lemma.equation.lhs, lemma.equation.rhs, lemma.equation.vars, f"lemma{len(self.lemmas) + 1}")
        lemma.rules = compile_equation(lemma.equation, RuleOrigin.LEMMA)
        self.lemmas.append(lemma)
        self.rules = self.rules.extend(lemma.rules)
        self.theory.eqs.append(lemma.equation)
        self.stats.conjectures["proved"] += 1
        self.log_event("lemma", str(lemma.equation))
        logger.info("lemma %s: %s", lemma.equation.name, lemma.equation)
        g = self.state.egraph
        # the generalization reaches the graph through its rules only
        g.merge(g.add(lemma.conjecture.lhs), g.add(lemma.conjecture.rhs))
        g.rebuild()
        self.saturate_master()
        if self.on_admit is not None:
            self.on_admit(lemma)
        self.drain_retries()

    def drain_retries(self) -> None:
        """Re-check failed conjectures against the grown rule set."""
        while self.retry and not self.done:
            queue, self.retry = self.retry, []
            proved = None
            for i, conj in enumerate(queue):
                self.check_deadline()
                with self.phase("proving"):
                    if check_no_induction(conj, self.rules, self.limits):
                        conj.status = ConjectureStatus.REDUNDANT
                        self.attempted[conj.key] = conj.status
                        self.log_event("redundant", conj.key)
                        continue
                    self.stats.conjectures["retried"] += 1
                    self.log_event("retry", conj.key)
                    result = prove(conj, self.rules, self.limits)
                self.attempted[conj.key] = conj.status
                if isinstance(result, Lemma):
                    proved = result
                    self.retry.extend(queue[i + 1:])
                    break
                self.retry.append(conj)
            if proved is None:
                return
            # admit re-enters the queue with the new lemma in place
            self.admit(proved)
            return


def explore(
    theory: Theory,
    config: Optional[ExplorerConfig] = None,
    events: Optional[List[Dict[str, str]]] = None,
) -> Tuple[List[Lemma], Stats]:
    """Lemmas in discovery order; ``events`` (if given) receives the discovery log."""
    config = config or ExplorerConfig()
    session = Session(load_seed_lemmas(theory, config.seed_dir), config)
    try:
        return session.run()
    finally:
        if events is not None:
            events.extend(session.events)


class GoalTracker:
    """Attempts the open goals before exploring and after every admitted lemma."""

    def __init__(self, session: Session, goals: Sequence[Equation]):
        self.session = session
        self.goals = list(goals)
        self.conjectures = conjectures_from(self.goals)
        self.results = [GoalResult(str(goal)) for goal in self.goals]
        self.failed_once: Dict[int, bool] = {}

    def open(self) -> List[int]:
        return [i for i, r in enumerate(self.results) if not r.proved]

    def attempt(self, _lemma: Optional[Lemma] = None) -> None:
        s = self.session
        for i in self.open():
            conj = self.conjectures[i]
            if self.failed_once.get(i):
                s.stats.conjectures["retried"] += 1
            with s.phase("proving"):
                proved = check_no_induction(conj, s.rules, s.limits) or any(
                    prove_by_induction(v, s.rules, s.limits) for v in induction_variants(conj)
                )
            if proved:
                self.results[i].proved = True
                self.results[i].time = round(time.monotonic() - s.started, 3)
                s.log_event("goal", f"proved {self.results[i].goal}")
                logger.info("goal proved: %s", self.results[i].goal)
            else:
                self.failed_once[i] = True
            s.check_deadline()
        if not self.open():
            s.done = True


def prove_goals(
    theory: Theory,
    config: Optional[ExplorerConfig] = None,
    events: Optional[List[Dict[str, str]]] = None,
) -> Tuple[List[GoalResult], Stats]:
    """Explore ``theory`` until every goal is proved or exploration runs out."""
    config = config or ExplorerConfig()
    session = Session(load_seed_lemmas(theory, config.seed_dir), config)
    tracker = GoalTracker(session, theory.goals)
    session.on_admit = tracker.attempt
    try:
        tracker.attempt()
    except SearchTimeout:
        session.stats.truncated = True
    if not session.done and not session.stats.truncated:
        session.run()
    elapsed = round(time.monotonic() - session.started, 3)
    for result in tracker.results:
        if not result.proved:
            result.time = elapsed
            session.log_event("goal", f"failed {result.goal}")
    session.stats.lemmas = [str(lemma) for lemma in session.lemmas]
    if events is not None:
        events.extend(session.events)
    return tracker.results, session.stats


def subsumption_ratio(
    t_a: Sequence[Equation],
    t_b: Sequence[Equation],
    base: Theory,
    config: Optional[ExplorerConfig] = None,
) -> float:
    """Fraction of ``t_a`` that rewriting proves from ``base`` plus ``t_b``."""
    if not t_a:
        return 1.0
    config = config or ExplorerConfig()
    rules = compile_theory(base)
    for eq in t_b:
        try:
            rules = rules.extend(compile_equation(eq, RuleOrigin.LEMMA))
        except RuleError as exc:
            logger.warning("lemma %s left out: %s", eq, exc)
    proved = sum(1 for conj in conjectures_from(t_a) if check_no_induction(conj, rules, config.limits))
    return proved / len(t_a)
