class BaseAgent:
    """Simple base class for all agents."""

    name: str = "base"
    TRIGGERS: set = set()

    def __init__(self, orchestrator=None):
        self.orchestrator = orchestrator

    @classmethod
    def match_terms(cls, text: str) -> bool:
        return text_matches(text, cls.TRIGGERS)

    def remember(self, name: str, entry: dict) -> None:
        if self.orchestrator:
            self.orchestrator.memory.add(name or "anon", {"agent": self.name, **entry})

    def handle(self, *args, **kwargs):
        """Handle a generic request and return a result."""
        raise NotImplementedError


import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from utils import Memory, append_events, text_matches
from utils.file_utils import DISCOVERY_LOG
from Agents.Parseragent.smtlib import GOAL_TRIGGERS, parse_lemmas, parse_theory, serialize_lemmas
from Agents.Parseragent.terms import Theory
from Agents.Exploreragent.explorer import (
    ExplorerConfig,
    explore,
    load_seed_lemmas,
    prove_goals,
    subsumption_ratio,
)
from Agents.Exploreragent.report import genereer_rapport

logger = logging.getLogger(__name__)

# Kernwoorden waaraan een theorie-invoer herkend wordt.
THEORY_TRIGGERS = {"(declare-datatype", "(define-fun", "(declare-fun"}


class ParserAgent(BaseAgent):
    """Agent die SMT-LIB tekst omzet naar een theorie."""

    name = "parser"
    TRIGGERS = THEORY_TRIGGERS

    def parse(self, text: str, base: Optional[Theory] = None, seed_dir: Optional[str] = None) -> Theory:
        theory = parse_theory(text, base)
        return load_seed_lemmas(theory, seed_dir)

    def lemmas(self, text: str, base: Theory):
        return parse_lemmas(text, base)

    def handle(self, *, text=None, **kw):
        if not text:
            return {"status": "geen input"}
        theory = self.parse(text)
        return {
            "status": "ok",
            "datatypes": [str(dt.sort) for dt in theory.datatypes],
            "functies": [f.name for f in theory.funcs],
            "vergelijkingen": len(theory.eqs),
            "doelen": [str(g) for g in theory.goals],
        }


class ExplorerAgent(BaseAgent):
    """Agent die lemma's ontdekt in een theorie."""

    name = "explore"
    TRIGGERS = THEORY_TRIGGERS

    def __init__(self, orchestrator=None, log_path: Optional[Path] = None):
        super().__init__(orchestrator)
        self.log_path = log_path

    def explore(self, text: str, config: Optional[ExplorerConfig] = None) -> dict:
        config = config or ExplorerConfig.from_env()
        theory = self.orchestrator.parser.parse(text) if self.orchestrator else parse_theory(text)
        events: List[Dict[str, str]] = []
        lemmas, stats = explore(theory, config, events)
        if self.log_path:
            append_events(self.log_path, self.name, events)
        return {
            "status": "ok",
            "lemmas": [str(lemma.equation) for lemma in lemmas],
            "lemma_file": serialize_lemmas(lemma.equation for lemma in lemmas),
            "stats": stats.to_dict(),
            "events": events,
        }

    def report(self, result: dict, formaat: str) -> Tuple[str, bytes]:
        return genereer_rapport(result, formaat)

    def handle(self, *, text=None, config=None, context=None, **kw):
        if not text:
            return {"status": "geen input"}
        result = self.explore(text, config)
        if context is not None:
            context[self.name] = result
        self.remember(kw.get("user"), {"lemmas": result["lemmas"], "stats": result["stats"]})
        return result


class ProverAgent(BaseAgent):
    """Agent die bewijsdoelen probeert te bewijzen."""

    name = "prove"
    TRIGGERS = GOAL_TRIGGERS

    def __init__(self, orchestrator=None, log_path: Optional[Path] = None):
        super().__init__(orchestrator)
        self.log_path = log_path

    def prove(self, text: str, config: Optional[ExplorerConfig] = None) -> dict:
        config = config or ExplorerConfig.from_env()
        theory = self.orchestrator.parser.parse(text) if self.orchestrator else parse_theory(text)
        if not theory.goals:
            return {"status": "geen doelen", "goals": []}
        events: List[Dict[str, str]] = []
        results, stats = prove_goals(theory, config, events)
        if self.log_path:
            append_events(self.log_path, self.name, events)
        return {
            "status": "ok" if all(r.proved for r in results) else "niet bewezen",
            "goals": [{"goal": r.goal, "proved": r.proved, "time": r.time} for r in results],
            "lemmas": stats.lemmas,
            "stats": stats.to_dict(),
        }

    def handle(self, *, text=None, config=None, context=None, **kw):
        if not text:
            return {"status": "geen input"}
        result = self.prove(text, config)
        if context is not None:
            context[self.name] = result
        self.remember(kw.get("user"), {"goals": result["goals"], "lemmas": result.get("lemmas", [])})
        return result


class CompareAgent(BaseAgent):
    """Agent die twee lemmaverzamelingen vergelijkt op kennis."""

    name = "compare"

    def compare(self, base_text: str, a_text: str, b_text: str, config: Optional[ExplorerConfig] = None) -> dict:
        config = config or ExplorerConfig.from_env()
        base = parse_theory(base_text)
        t_a, t_b = parse_lemmas(a_text, base), parse_lemmas(b_text, base)
        return {
            "status": "ok",
            "a_in_b": subsumption_ratio(t_a, t_b, base, config),
            "b_in_a": subsumption_ratio(t_b, t_a, base, config),
        }

    def handle(self, *, base=None, a=None, b=None, config=None, **kw):
        if not (base and a is not None and b is not None):
            return {"status": "geen input"}
        result = self.compare(base, a, b, config)
        self.remember(kw.get("user"), result)
        return result


class MainAgent:
    """Orchestrator die automatisch de juiste agent(en) aanroept."""

    def __init__(self, memory_path: Optional[Path] = None, log_path: Optional[Path] = DISCOVERY_LOG):
        self.memory = Memory(memory_path)
        self.parser = ParserAgent(self)
        self.explorer = ExplorerAgent(self, log_path)
        self.prover = ProverAgent(self, log_path)
        self.compare = CompareAgent(self)
        # volgorde telt: een theorie met doelen gaat naar de prover
        self.agents = [self.prover, self.explorer]

    def detect_agent(self, text: str) -> Optional[BaseAgent]:
        """Kies een agent op basis van de invoer."""
        for agent in self.agents:
            if agent.match_terms(text):
                return agent
        return None

    def auto_route(self, text: str, user: str | None = None, **kwargs) -> dict:
        """Stuur ``text`` door naar de eerste passende agent."""
        context: dict = {}
        agent = self.detect_agent(text)
        if agent is None:
            context["status"] = "geen match"
        else:
            agent.handle(text=text, context=context, user=user, **kwargs)
        if user:
            self.memory.add(user, {"input": text[:200], "agents": list(context)})
        return context
