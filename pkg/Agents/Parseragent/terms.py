"""Sorted terms, equations and theories shared by every phase of the explorer."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple


class ExplorationError(Exception):
    """Base class for every error raised by the explorer."""


class SortError(ExplorationError):
    pass


@dataclass(frozen=True)
class Sort:
    name: str
    params: Tuple["Sort", ...] = ()
    is_type_var: bool = False

    def __post_init__(self):
        if self.is_type_var and self.params:
            raise SortError(f"type variable {self.name} cannot take parameters")

    @property
    def is_function(self) -> bool:
        return self.name == "=>"

    @property
    def domain(self) -> Tuple["Sort", ...]:
        return self.params[:-1] if self.is_function else ()

    @property
    def codomain(self) -> "Sort":
        return self.params[-1] if self.is_function else self

    @cached_property
    def stub(self) -> str:
        """Short lowercase name used for generated variable names."""
        if self.is_function:
            return "fn"
        cleaned = re.sub(r"[^0-9a-zA-Z]", "", self.name).lower()
        return cleaned or "s"

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return "(" + " ".join([self.name] + [str(p) for p in self.params]) + ")"


BOOL = Sort("Bool")


def function_sort(args: Iterable[Sort], ret: Sort) -> Sort:
    return Sort("=>", tuple(args) + (ret,))


class SymbolKind(str, Enum):
    FUNCTION = "function"
    CONSTRUCTOR = "constructor"
    MATCHER = "matcher"  # lifted match: scrutinee first, then the arms' free variables
    APPLY = "apply"  # (@ f x ...)
    FUNREF = "funref"  # a declared function used as a value
    PLACEHOLDER = "placeholder"
    UNINTERPRETED = "uninterpreted"
    VARIABLE = "variable"
    ITE = "ite"
    MATCH = "match"


LEAF_KINDS = frozenset(
    {SymbolKind.FUNREF, SymbolKind.PLACEHOLDER, SymbolKind.UNINTERPRETED, SymbolKind.VARIABLE}
)
SURFACE_KINDS = frozenset({SymbolKind.ITE, SymbolKind.MATCH})


@dataclass(frozen=True)
class Symbol:
    name: str
    sort: Sort
    kind: SymbolKind = SymbolKind.FUNCTION
    index: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.kind in LEAF_KINDS

    @property
    def is_constructor(self) -> bool:
        return self.kind is SymbolKind.CONSTRUCTOR

    @property
    def is_free_var(self) -> bool:
        return self.kind in (SymbolKind.PLACEHOLDER, SymbolKind.VARIABLE)

    def __str__(self) -> str:
        if self.kind is SymbolKind.PLACEHOLDER:
            return f"?{self.sort.stub}{self.index}"
        return self.name


@dataclass(frozen=True)
class FuncDecl:
    name: str
    arg_sorts: Tuple[Sort, ...]
    ret_sort: Sort
    is_constructor: bool = False

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    @property
    def symbol(self) -> Symbol:
        kind = SymbolKind.CONSTRUCTOR if self.is_constructor else SymbolKind.FUNCTION
        return Symbol(self.name, self.ret_sort, kind)

    @property
    def function_sort(self) -> Sort:
        return function_sort(self.arg_sorts, self.ret_sort)

    def __call__(self, *args: "Term") -> "Term":
        if len(args) != self.arity:
            raise SortError(f"{self.name} expects {self.arity} arguments, got {len(args)}")
        for expected, arg in zip(self.arg_sorts, args):
            if arg.sort != expected:
                raise SortError(f"{self.name}: argument {arg} has sort {arg.sort}, expected {expected}")
        return Term(self.symbol, tuple(args))


@dataclass(frozen=True)
class Term:
    head: Symbol
    args: Tuple["Term", ...] = ()
    # constructor patterns of a surface ``match``; args[0] is the scrutinee, args[1:] the arm bodies
    cases: Tuple["Term", ...] = ()

    @property
    def sort(self) -> Sort:
        return self.head.sort

    @property
    def is_leaf(self) -> bool:
        return not self.args and not self.cases

    @cached_property
    def size(self) -> int:
        return 1 + sum(a.size for a in self.args)

    @cached_property
    def height(self) -> int:
        return 1 + max((a.height for a in self.args), default=-1)

    @cached_property
    def free_vars(self) -> Tuple[Symbol, ...]:
        """Distinct placeholders and variables in order of first occurrence."""
        if self.head.is_free_var:
            return (self.head,)
        found: Dict[Symbol, None] = {}
        if self.head.kind is SymbolKind.MATCH:
            found.update(dict.fromkeys(self.args[0].free_vars))
            for pattern, body in zip(self.cases, self.args[1:]):
                bound = set(pattern.free_vars)
                found.update(dict.fromkeys(v for v in body.free_vars if v not in bound))
        else:
            for arg in self.args:
                found.update(dict.fromkeys(arg.free_vars))
        return tuple(found)

    @cached_property
    def sexp(self) -> str:
        head = self.head
        if head.kind is SymbolKind.MATCH:
            arms = " ".join(f"({p.sexp} {b.sexp})" for p, b in zip(self.cases, self.args[1:]))
            return f"(match {self.args[0].sexp} ({arms}))"
        if not self.args:
            return str(head)
        name = "@" if head.kind is SymbolKind.APPLY else str(head)
        return "(" + " ".join([name] + [a.sexp for a in self.args]) + ")"

    @cached_property
    def order_key(self) -> Tuple[int, int, str]:
        return (self.size, -len(self.free_vars), self.sexp)

    def subterms(self) -> Iterator["Term"]:
        yield self
        for arg in self.args:
            yield from arg.subterms()

    def symbols(self) -> Iterator[Symbol]:
        for sub in self.subterms():
            yield sub.head

    def __str__(self) -> str:
        return self.sexp


def leaf(symbol: Symbol) -> Term:
    return Term(symbol)


def var(name: str, sort: Sort) -> Term:
    return Term(Symbol(name, sort, SymbolKind.VARIABLE))


def placeholder(index: int, sort: Sort) -> Term:
    return Term(Symbol(f"ph{index}", sort, SymbolKind.PLACEHOLDER, index))


def uninterpreted(name: str, sort: Sort) -> Term:
    return Term(Symbol(name, sort, SymbolKind.UNINTERPRETED))


def funref(decl: FuncDecl) -> Term:
    return Term(Symbol(decl.name, decl.function_sort, SymbolKind.FUNREF))


def apply_fn(fn: Term, *args: Term) -> Term:
    if not fn.sort.is_function or len(fn.sort.domain) != len(args):
        raise SortError(f"{fn} cannot be applied to {len(args)} arguments")
    for expected, arg in zip(fn.sort.domain, args):
        if arg.sort != expected:
            raise SortError(f"@ {fn}: argument {arg} has sort {arg.sort}, expected {expected}")
    return Term(Symbol("@", fn.sort.codomain, SymbolKind.APPLY), (fn,) + tuple(args))


def ite(cond: Term, then: Term, other: Term) -> Term:
    if cond.sort != BOOL:
        raise SortError(f"ite condition {cond} is not Bool")
    if then.sort != other.sort:
        raise SortError(f"ite branches differ in sort: {then.sort} / {other.sort}")
    return Term(Symbol("ite", then.sort, SymbolKind.ITE), (cond, then, other))


def match_term(scrutinee: Term, arms: Iterable[Tuple[Term, Term]]) -> Term:
    arms = list(arms)
    if not arms:
        raise SortError("match without arms")
    sort = arms[0][1].sort
    for pattern, body in arms:
        if pattern.sort != scrutinee.sort:
            raise SortError(f"pattern {pattern} does not match scrutinee sort {scrutinee.sort}")
        if body.sort != sort:
            raise SortError(f"match arms differ in sort: {body.sort} / {sort}")
    return Term(
        Symbol("match", sort, SymbolKind.MATCH),
        (scrutinee,) + tuple(b for _, b in arms),
        tuple(p for p, _ in arms),
    )


def substitute(term: Term, mapping: Mapping[Symbol, Term]) -> Term:
    """Replace leaves by symbol; pattern-bound variables shadow the mapping."""
    if not mapping:
        return term
    if term.is_leaf:
        return mapping.get(term.head, term)
    if term.head.kind is SymbolKind.MATCH:
        scrutinee = substitute(term.args[0], mapping)
        bodies = []
        for pattern, body in zip(term.cases, term.args[1:]):
            bound = set(pattern.free_vars)
            inner = {k: v for k, v in mapping.items() if k not in bound}
            bodies.append(substitute(body, inner))
        return Term(term.head, (scrutinee,) + tuple(bodies), term.cases)
    return Term(term.head, tuple(substitute(a, mapping) for a in term.args), term.cases)


@dataclass(frozen=True)
class Equation:
    lhs: Term
    rhs: Term
    vars: Tuple[Tuple[str, Sort], ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.lhs.sort != self.rhs.sort:
            raise SortError(f"ill-sorted equation: {self.lhs.sort} vs {self.rhs.sort}")
        declared = {(n, s) for n, s in self.vars}
        for sym in self.lhs.free_vars + self.rhs.free_vars:
            if sym.kind is SymbolKind.VARIABLE and (sym.name, sym.sort) not in declared:
                raise SortError(f"variable {sym.name} is not bound in {self}")

    @property
    def free_vars(self) -> Tuple[Symbol, ...]:
        return tuple(dict.fromkeys(self.lhs.free_vars + self.rhs.free_vars))

    @cached_property
    def order_key(self) -> Tuple[int, int, str]:
        return (
            self.lhs.size + self.rhs.size,
            -len(self.free_vars),
            f"{self.lhs.sexp} = {self.rhs.sexp}",
        )

    def __str__(self) -> str:
        return f"{self.lhs.sexp} = {self.rhs.sexp}"


@dataclass(frozen=True)
class Datatype:
    sort: Sort
    constructors: Tuple[FuncDecl, ...]

    def is_recursive(self, ctor: FuncDecl) -> bool:
        return self.sort in ctor.arg_sorts

    @property
    def base_constructors(self) -> Tuple[FuncDecl, ...]:
        return tuple(c for c in self.constructors if not self.is_recursive(c))


BOOL_DATATYPE = Datatype(
    BOOL,
    (FuncDecl("true", (), BOOL, True), FuncDecl("false", (), BOOL, True)),
)


@dataclass
class Theory:
    sorts: List[Sort] = field(default_factory=list)
    datatypes: List[Datatype] = field(default_factory=list)
    funcs: List[FuncDecl] = field(default_factory=list)
    eqs: List[Equation] = field(default_factory=list)
    goals: List[Equation] = field(default_factory=list)
    fun_refs: List[FuncDecl] = field(default_factory=list)

    @property
    def constructors(self) -> List[FuncDecl]:
        return [f for f in self.funcs if f.is_constructor]

    def datatype_of(self, sort: Sort) -> Optional[Datatype]:
        if sort == BOOL:
            return BOOL_DATATYPE
        for dt in self.datatypes:
            if dt.sort == sort:
                return dt
        return None

    def datatype_map(self) -> Dict[Sort, Datatype]:
        found = {dt.sort: dt for dt in self.datatypes}
        found.setdefault(BOOL, BOOL_DATATYPE)
        return found

    def lookup(self, name: str) -> Optional[FuncDecl]:
        for f in self.funcs:
            if f.name == name:
                return f
        return None

    def with_equations(self, extra: Iterable[Equation]) -> "Theory":
        return replace(self, eqs=list(self.eqs) + list(extra), goals=list(self.goals))


def as_variables(terms: Iterable[Term]) -> Tuple[Dict[Symbol, Term], Tuple[Tuple[str, Sort], ...]]:
    """Map every placeholder in ``terms`` to a named variable (``list1``, ``nat2`` ...)."""
    mapping: Dict[Symbol, Term] = {}
    names: Dict[str, Sort] = {}
    for term in terms:
        for sym in term.free_vars:
            if sym in mapping or sym.kind is not SymbolKind.PLACEHOLDER:
                continue
            base = f"{sym.sort.stub}{sym.index}"
            name = base
            suffix = 0
            while name in names:
                suffix += 1
                name = f"{base}_{suffix}"
            names[name] = sym.sort
            mapping[sym] = var(name, sym.sort)
    return mapping, tuple(names.items())


def as_placeholders(eq: Equation) -> Tuple[Term, Term]:
    """Turn an equation's variables into placeholders, numbered per sort in binding order."""
    counters: Dict[Sort, int] = {}
    mapping: Dict[Symbol, Term] = {}
    for name, sort in eq.vars:
        counters[sort] = counters.get(sort, 0) + 1
        mapping[Symbol(name, sort, SymbolKind.VARIABLE)] = placeholder(counters[sort], sort)
    return substitute(eq.lhs, mapping), substitute(eq.rhs, mapping)


def to_equation(lhs: Term, rhs: Term, name: str = "") -> Equation:
    mapping, names = as_variables((lhs, rhs))
    return Equation(substitute(lhs, mapping), substitute(rhs, mapping), names, name)
