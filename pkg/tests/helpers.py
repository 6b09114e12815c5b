"""Ground evaluator for benchmark theories; the tests use it to check lemmas on concrete values."""
import random
import zlib
from pathlib import Path
from typing import Dict, List, Optional

from Agents.Parseragent.smtlib import parse_theory
from Agents.Parseragent.terms import Equation, Sort, Symbol, SymbolKind, Term, Theory, uninterpreted

BENCHMARKS = Path(__file__).resolve().parent.parent / "benchmarks"


def load(name: str) -> Theory:
    return parse_theory((BENCHMARKS / name).read_text(encoding="utf-8"))


def _bind(pattern: Term, value: Term, binding: Dict[Symbol, Term]) -> bool:
    if pattern.head.kind is SymbolKind.VARIABLE:
        binding[pattern.head] = value
        return True
    if pattern.head != value.head:
        return False
    return all(_bind(p, v, binding) for p, v in zip(pattern.args, value.args))


class Interpreter:
    """Call-by-value evaluation using the definition equations of a theory."""

    def __init__(self, theory: Theory, fuel: int = 100_000):
        self.theory = theory
        self.fuel = fuel
        self.defs: Dict[str, List[Equation]] = {}
        for eq in theory.eqs:
            if eq.lhs.head.kind is SymbolKind.FUNCTION:
                self.defs.setdefault(eq.lhs.head.name, []).append(eq)

    def eval(self, term: Term, env: Optional[Dict[Symbol, Term]] = None) -> Term:
        env = env or {}
        head = term.head
        if head.kind is SymbolKind.VARIABLE:
            return env[head]
        if head.kind in (SymbolKind.UNINTERPRETED, SymbolKind.FUNREF):
            return term
        if head.kind is SymbolKind.MATCH:
            value = self.eval(term.args[0], env)
            for pattern, body in zip(term.cases, term.args[1:]):
                binding: Dict[Symbol, Term] = {}
                if _bind(pattern, value, binding):
                    return self.eval(body, {**env, **binding})
            raise ValueError(f"no arm of {term} matches {value}")
        args = tuple(self.eval(a, env) for a in term.args)
        if head.kind is SymbolKind.CONSTRUCTOR:
            return Term(head, args)
        if head.kind is SymbolKind.APPLY:
            if args[0].head.kind is SymbolKind.UNINTERPRETED:
                return self.table(args[0], args[1:])
            return self.call(args[0].head.name, args[1:])
        return self.call(head.name, args)

    def table(self, fn: Term, args) -> Term:
        """A sampled function: a fixed pseudo-random constant per argument tuple."""
        sort = fn.sort.codomain
        key = zlib.crc32(" ".join([fn.sexp] + [a.sexp for a in args]).encode())
        datatype = self.theory.datatype_of(sort)
        constants = [c for c in datatype.constructors if not c.arg_sorts] if datatype else []
        if constants:
            return constants[key % len(constants)]()
        return uninterpreted(f"e{key % 3 + 1}", sort)

    def call(self, name: str, args) -> Term:
        self.fuel -= 1
        if self.fuel < 0:
            raise RuntimeError("evaluation ran out of fuel")
        for eq in self.defs.get(name, []):
            binding: Dict[Symbol, Term] = {}
            if all(_bind(p, a, binding) for p, a in zip(eq.lhs.args, args)):
                return self.eval(eq.rhs, binding)
        raise ValueError(f"no equation of {name} applies to {args}")


def sample(theory: Theory, sort: Sort, rng: random.Random, depth: int = 3) -> Term:
    """A random ground value; sorts without constructors get constants e1..e3, functions a random table."""
    if sort.is_function:
        return uninterpreted(f"fn{rng.randint(1, 1000)}", sort)
    datatype = theory.datatype_of(sort)
    if datatype is None:
        return uninterpreted(f"e{rng.randint(1, 3)}", sort)
    ctors = datatype.constructors if depth > 0 else datatype.base_constructors
    ctor = rng.choice(ctors)
    return ctor(*(sample(theory, s, rng, depth - 1) for s in ctor.arg_sorts))


def holds(theory: Theory, eq: Equation, trials: int = 25, seed: int = 7) -> bool:
    """True if both sides agree on ``trials`` random instantiations."""
    rng = random.Random(seed)
    interp = Interpreter(theory)
    for _ in range(trials):
        env = {
            Symbol(name, sort, SymbolKind.VARIABLE): sample(theory, sort, rng)
            for name, sort in eq.vars
        }
        if interp.eval(eq.lhs, env) != interp.eval(eq.rhs, env):
            return False
    return True
