"""Reader and writer for the SMT-LIB 2.6 subset the explorer consumes.

Accepted commands: ``declare-datatype(s)``, ``declare-sort``, ``declare-fun``,
``define-fun``, ``define-fun-rec``, ``define-funs-rec``, ``assert`` of a
universally quantified equation, and goals written as ``prove``, ``assert-not``
or ``(assert (not ...))``.
"""
from __future__ import annotations

import itertools
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from utils.text_utils import SExpr, SExprSyntaxError, format_sexp, read_sexps

from .terms import (
    BOOL,
    BOOL_DATATYPE,
    Datatype,
    Equation,
    ExplorationError,
    FuncDecl,
    Sort,
    SortError,
    SymbolKind,
    Term,
    Theory,
    apply_fn,
    function_sort,
    funref,
    ite,
    match_term,
    substitute,
    var,
)

logger = logging.getLogger(__name__)

IGNORED_COMMANDS = {
    "set-logic",
    "set-info",
    "set-option",
    "check-sat",
    "get-model",
    "get-info",
    "exit",
}

# Triggers in raw input that mark a file as carrying proof goals.
GOAL_TRIGGERS = {"(prove", "(assert-not", "(assert (not"}


class ParseError(ExplorationError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(f"{message}{where}")
        self.message = message
        self.line = line
        self.column = column


class DesugarError(ExplorationError):
    pass


TRUE, FALSE = (c() for c in BOOL_DATATYPE.constructors)


def desugar(term: Term) -> Term:
    """Rewrite every ``ite`` into a ``match`` on Bool; check match patterns."""
    if term.is_leaf:
        return term
    if term.head.kind is SymbolKind.ITE:
        cond, then, other = (desugar(a) for a in term.args)
        return match_term(cond, [(TRUE, then), (FALSE, other)])
    if term.head.kind is SymbolKind.MATCH:
        for pattern in term.cases:
            if not pattern.head.is_constructor or any(
                a.head.kind is not SymbolKind.VARIABLE for a in pattern.args
            ):
                raise DesugarError(f"match pattern {pattern} is not a constructor pattern")
    return Term(term.head, tuple(desugar(a) for a in term.args), term.cases)


def serialize_lemmas(lemmas: Iterable[Equation]) -> str:
    """One ``(assert (forall ...))`` line per lemma, in term order."""
    lines = []
    for eq in sorted(lemmas, key=lambda e: e.order_key):
        body = f"(= {eq.lhs.sexp} {eq.rhs.sexp})"
        if eq.vars:
            binders = " ".join(f"({name} {sort})" for name, sort in eq.vars)
            lines.append(f"(assert (forall ({binders}) {body}))")
        else:
            lines.append(f"(assert {body})")
    return "".join(line + "\n" for line in lines)


class _TheoryBuilder:
    """Collects declarations; turned into a Theory only once every form parsed."""

    def __init__(self, base: Optional[Theory] = None):
        self.sort_arity: Dict[str, int] = {"Bool": 0}
        self.type_vars: Set[str] = set()
        self.sorts: List[Sort] = []
        self.datatypes: List[Datatype] = []
        self.funcs: Dict[str, FuncDecl] = {c.name: c for c in BOOL_DATATYPE.constructors}
        self.builtin = set(self.funcs)
        self.eqs: List[Equation] = []
        self.goals: List[Equation] = []
        self.fun_refs: Dict[str, FuncDecl] = {}
        self._fresh = itertools.count(1)
        if base is not None:
            for sort in base.sorts:
                self.sort_arity[sort.name] = len(sort.params)
                for p in sort.params:
                    if p.is_type_var:
                        self.type_vars.add(p.name)
            self.sorts = list(base.sorts)
            self.datatypes = list(base.datatypes)
            for f in base.funcs:
                self.funcs[f.name] = f
                for s in f.arg_sorts + (f.ret_sort,):
                    self._note_type_vars(s)
            self.fun_refs = {f.name: f for f in base.fun_refs}
            self.eqs = list(base.eqs)
            self.goals = list(base.goals)

    def _note_type_vars(self, sort: Sort) -> None:
        if sort.is_type_var:
            self.type_vars.add(sort.name)
        for p in sort.params:
            self._note_type_vars(p)

    # sorts ---------------------------------------------------------------

    def sort(self, expr: SExpr, tvars: Set[str] = frozenset()) -> Sort:
        if isinstance(expr, str):
            if expr in tvars or (expr in self.type_vars and expr not in self.sort_arity):
                return Sort(expr, (), True)
            if expr == "Bool":
                return BOOL
            if self.sort_arity.get(expr) == 0:
                return Sort(expr)
            raise ParseError(f"unknown sort {expr}")
        if not expr:
            raise ParseError("empty sort")
        head, *params = expr
        if head == "=>":
            if len(params) < 2:
                raise ParseError("function sort needs at least one argument")
            parts = [self.sort(p, tvars) for p in params]
            return function_sort(parts[:-1], parts[-1])
        if not isinstance(head, str) or self.sort_arity.get(head) != len(params):
            raise ParseError(f"unknown sort {format_sexp(expr)}")
        return Sort(head, tuple(self.sort(p, tvars) for p in params))

    # datatypes -----------------------------------------------------------

    def declare_datatypes(self, heads: Sequence[Tuple[str, int]], bodies: Sequence[SExpr]) -> None:
        if len(heads) != len(bodies):
            raise ParseError("datatype names and bodies differ in number")
        for name, arity in heads:
            if name in self.sort_arity:
                raise ParseError(f"sort {name} declared twice")
            self.sort_arity[name] = arity
        for (name, arity), body in zip(heads, bodies):
            tvars: List[str] = []
            if isinstance(body, list) and body and body[0] == "par":
                tvars = list(body[1])
                body = body[2]
            if len(tvars) != arity:
                raise ParseError(f"datatype {name} declares {arity} parameters, body binds {len(tvars)}")
            self.type_vars.update(tvars)
            sort = Sort(name, tuple(Sort(t, (), True) for t in tvars))
            ctors = []
            for cdecl in body:
                if isinstance(cdecl, str):
                    cname, fields = cdecl, []
                else:
                    cname, fields = cdecl[0], cdecl[1:]
                arg_sorts = tuple(self.sort(f[1], set(tvars)) for f in fields)
                ctors.append(self._declare(FuncDecl(cname, arg_sorts, sort, True)))
            dt = Datatype(sort, tuple(ctors))
            if not dt.base_constructors:
                raise ParseError(f"datatype {name} has no base constructor")
            self.sorts.append(sort)
            self.datatypes.append(dt)

    def _declare(self, decl: FuncDecl) -> FuncDecl:
        if decl.name in self.funcs:
            raise ParseError(f"symbol {decl.name} declared twice")
        self.funcs[decl.name] = decl
        return decl

    # terms ---------------------------------------------------------------

    def term(self, expr: SExpr, env: Dict[str, Term], tvars: Set[str]) -> Term:
        if isinstance(expr, str):
            if expr in env:
                return env[expr]
            decl = self.funcs.get(expr)
            if decl is None:
                raise ParseError(f"unknown symbol {expr}")
            if decl.arity == 0:
                return decl()
            self.fun_refs.setdefault(decl.name, decl)
            return funref(decl)
        if not expr:
            raise ParseError("empty application")
        head, *rest = expr
        if head == "as":
            inner = self.term(rest[0], env, tvars)
            if inner.sort != self.sort(rest[1], tvars):
                raise ParseError(f"{format_sexp(expr)}: annotation does not match sort {inner.sort}")
            return inner
        if head == "ite":
            return ite(*(self.term(a, env, tvars) for a in rest))
        if head == "not":
            return ite(self.term(rest[0], env, tvars), FALSE, TRUE)
        if head == "and":
            return self._connective(rest, env, tvars, lambda a, b: ite(a, b, FALSE))
        if head == "or":
            return self._connective(rest, env, tvars, lambda a, b: ite(a, TRUE, b))
        if head == "=>" and len(rest) == 2:
            a, b = (self.term(x, env, tvars) for x in rest)
            return ite(a, b, TRUE)
        if head == "let":
            inner = dict(env)
            for name, value in rest[0]:
                inner[name] = self.term(value, env, tvars)
            return self.term(rest[1], inner, tvars)
        if head == "match":
            return self._match(rest[0], rest[1], env, tvars)
        args = [self.term(a, env, tvars) for a in rest]
        if head == "@":
            return apply_fn(args[0], *args[1:])
        if isinstance(head, list):
            return apply_fn(self.term(head, env, tvars), *args)
        if head in env:
            return apply_fn(env[head], *args)
        decl = self.funcs.get(head)
        if decl is None:
            raise ParseError(f"unknown symbol {head}")
        return decl(*args)

    def _connective(self, parts, env, tvars, combine) -> Term:
        terms = [self.term(p, env, tvars) for p in parts]
        result = terms[-1]
        for t in reversed(terms[:-1]):
            result = combine(t, result)
        return result

    def _match(self, scrut_expr: SExpr, arms_expr: SExpr, env, tvars) -> Term:
        scrutinee = self.term(scrut_expr, env, tvars)
        dt = BOOL_DATATYPE if scrutinee.sort == BOOL else next(
            (d for d in self.datatypes if d.sort == scrutinee.sort), None
        )
        if dt is None:
            raise ParseError(f"match on non-datatype sort {scrutinee.sort}")
        arms: List[Tuple[Term, Term]] = []
        covered: Set[str] = set()
        for pat_expr, body_expr in arms_expr:
            if isinstance(pat_expr, str) and pat_expr not in self.funcs:
                # wildcard or binder: expand to every constructor not yet covered
                for ctor in dt.constructors:
                    if ctor.name in covered:
                        continue
                    pattern = self._fresh_pattern(ctor)
                    inner = dict(env)
                    if pat_expr != "_":
                        inner[pat_expr] = pattern
                    for v in pattern.args:
                        inner[v.head.name] = v
                    arms.append((pattern, self.term(body_expr, inner, tvars)))
                    covered.add(ctor.name)
                continue
            cname = pat_expr if isinstance(pat_expr, str) else pat_expr[0]
            binders = [] if isinstance(pat_expr, str) else pat_expr[1:]
            ctor = self.funcs[cname]
            if not ctor.is_constructor or ctor.ret_sort != scrutinee.sort:
                raise ParseError(f"{cname} is not a constructor of {scrutinee.sort}")
            if len(binders) != ctor.arity:
                raise ParseError(f"pattern {format_sexp(pat_expr)} has wrong arity")
            inner = dict(env)
            vars_ = []
            for name, sort in zip(binders, ctor.arg_sorts):
                inner[name] = var(name, sort)
                vars_.append(inner[name])
            arms.append((ctor(*vars_), self.term(body_expr, inner, tvars)))
            covered.add(cname)
        return match_term(scrutinee, arms)

    def _fresh_pattern(self, ctor: FuncDecl) -> Term:
        return ctor(*(var(f"_w{next(self._fresh)}", s) for s in ctor.arg_sorts))

    def binders(self, exprs: Sequence[SExpr], tvars: Set[str]) -> Tuple[Dict[str, Term], Tuple[Tuple[str, Sort], ...]]:
        env: Dict[str, Term] = {}
        declared = []
        for name, sort_expr in exprs:
            sort = self.sort(sort_expr, tvars)
            env[name] = var(name, sort)
            declared.append((name, sort))
        return env, tuple(declared)

    # equations -----------------------------------------------------------

    def formula(self, expr: SExpr) -> Equation:
        tvars: Set[str] = set()
        if isinstance(expr, list) and expr and expr[0] == "par":
            tvars = set(expr[1])
            expr = expr[2]
        env: Dict[str, Term] = {}
        declared: Tuple[Tuple[str, Sort], ...] = ()
        if isinstance(expr, list) and expr and expr[0] == "forall":
            env, declared = self.binders(expr[1], tvars)
            expr = expr[2]
        if not (isinstance(expr, list) and len(expr) == 3 and expr[0] == "="):
            raise ParseError("non-equational assertion")
        lhs = desugar(self.term(expr[1], env, tvars))
        rhs = desugar(self.term(expr[2], env, tvars))
        used = {s.name for s in lhs.free_vars + rhs.free_vars}
        return Equation(lhs, rhs, tuple(v for v in declared if v[0] in used))

    def define(self, name: str, params: SExpr, ret: SExpr, body: SExpr, tvars: Set[str]) -> None:
        decl = self.funcs[name]
        env, _ = self.binders(params, tvars)
        parsed = desugar(self.term(body, env, tvars))
        if parsed.sort != decl.ret_sort:
            raise ParseError(f"body of {name} has sort {parsed.sort}, expected {decl.ret_sort}")
        self.eqs.extend(definition_equations(decl, list(env.values()), parsed))

    def declare_signature(self, name: str, params: SExpr, ret: SExpr, tvars: Set[str]) -> FuncDecl:
        self.type_vars.update(tvars)
        arg_sorts = tuple(self.sort(p[1], tvars) for p in params)
        return self._declare(FuncDecl(name, arg_sorts, self.sort(ret, tvars)))

    # commands --------------------------------------------------------------

    def command(self, form: SExpr) -> None:
        if not isinstance(form, list) or not form or not isinstance(form[0], str):
            raise ParseError(f"unexpected top-level form {format_sexp(form)}")
        cmd, *args = form
        if cmd in IGNORED_COMMANDS:
            return
        if cmd == "declare-datatype":
            self.declare_datatypes([(args[0], _par_arity(args[1]))], [args[1]])
        elif cmd == "declare-datatypes":
            if args[0] and all(isinstance(h, list) for h in args[0]):
                heads = [(h[0], int(h[1])) for h in args[0]]
                self.declare_datatypes(heads, args[1])
            else:
                # TIP 2015 form: (declare-datatypes (T ...) ((Name ctor ...) ...))
                tvars = list(args[0])
                heads = [(d[0], len(tvars)) for d in args[1]]
                bodies = [["par", tvars, d[1:]] if tvars else d[1:] for d in args[1]]
                self.declare_datatypes(heads, bodies)
        elif cmd == "declare-sort":
            arity = int(args[1]) if len(args) > 1 else 0
            if arity:
                raise ParseError("parametric declare-sort is not supported")
            self.sort_arity[args[0]] = 0
            self.sorts.append(Sort(args[0]))
        elif cmd == "declare-fun":
            name, params, ret = args
            self._declare(FuncDecl(name, tuple(self.sort(p) for p in params), self.sort(ret)))
        elif cmd in ("define-fun", "define-fun-rec"):
            tvars: Set[str] = set()
            if len(args) == 1 and args[0][0] == "par":
                tvars, args = set(args[0][1]), args[0][2]
            name, params, ret, body = args
            self.declare_signature(name, params, ret, tvars)
            self.define(name, params, ret, body, tvars)
        elif cmd == "define-funs-rec":
            sigs, bodies = args
            parsed = []
            for sig in sigs:
                tvars = set()
                if sig[0] == "par":
                    tvars, sig = set(sig[1]), sig[2]
                self.declare_signature(sig[0], sig[1], sig[2], tvars)
                parsed.append((sig, tvars))
            for (sig, tvars), body in zip(parsed, bodies):
                self.define(sig[0], sig[1], sig[2], body, tvars)
        elif cmd == "assert":
            target = args[0]
            if isinstance(target, list) and target and target[0] == "not":
                self.goals.append(self.formula(target[1]))
            else:
                self.eqs.append(self.formula(target))
        elif cmd in ("prove", "assert-not"):
            self.goals.append(self.formula(args[0]))
        else:
            raise ParseError(f"unsupported command {cmd}")

    def build(self) -> Theory:
        eqs = list(self.eqs)
        for decl in self.fun_refs.values():
            if any(e.name == f"{decl.name}.apply" for e in eqs):
                continue
            eqs.append(application_equation(decl))
        return Theory(
            sorts=list(self.sorts),
            datatypes=list(self.datatypes),
            funcs=[f for n, f in self.funcs.items() if n not in self.builtin],
            eqs=eqs,
            goals=list(self.goals),
            fun_refs=list(self.fun_refs.values()),
        )


def _par_arity(body: SExpr) -> int:
    if isinstance(body, list) and body and body[0] == "par":
        return len(body[1])
    return 0


def application_equation(decl: FuncDecl) -> Equation:
    """``(@ f x1 .. xn) = (f x1 .. xn)`` for a function used as a value."""
    args = [var(f"x{i}", s) for i, s in enumerate(decl.arg_sorts, 1)]
    return Equation(
        apply_fn(funref(decl), *args),
        decl(*args),
        tuple((a.head.name, a.sort) for a in args),
        f"{decl.name}.apply",
    )


def definition_equations(decl: FuncDecl, params: List[Term], body: Term) -> List[Equation]:
    """One equation per arm of every ``match`` on a parameter or pattern variable."""
    eqs: List[Equation] = []

    def split(args: Tuple[Term, ...], rhs: Term) -> None:
        if rhs.head.kind is SymbolKind.MATCH and rhs.args[0].head.kind is SymbolKind.VARIABLE:
            scrut = rhs.args[0].head
            if any(scrut in a.free_vars for a in args):
                for pattern, arm in zip(rhs.cases, rhs.args[1:]):
                    mapping = {scrut: pattern}
                    split(tuple(substitute(a, mapping) for a in args), substitute(arm, mapping))
                return
        lhs = Term(decl.symbol, args)
        used = [(s.name, s.sort) for s in lhs.free_vars]
        eqs.append(Equation(lhs, rhs, tuple(used), f"{decl.name}.{len(eqs) + 1}"))

    split(tuple(params), body)
    return eqs


def parse_theory(text: str, base: Optional[Theory] = None) -> Theory:
    """Parse ``text`` into a Theory.

    With ``base`` the result extends it: its declarations are visible and its
    equations and goals come first.

    Parsing is all-or-nothing: on error nothing is returned and ``base`` is
    left untouched.
    """
    try:
        forms = read_sexps(text)
    except SExprSyntaxError as exc:
        raise ParseError(exc.message, exc.line, exc.column) from exc
    builder = _TheoryBuilder(base)
    for form, (line, col) in forms:
        try:
            builder.command(form)
        except ParseError as exc:
            raise ParseError(exc.message, line, col) from exc
        except (SortError, DesugarError) as exc:
            raise ParseError(str(exc), line, col) from exc
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise ParseError(f"malformed form {format_sexp(form)[:60]}", line, col) from exc
    theory = builder.build()
    logger.debug(
        "parsed theory: %d datatypes, %d symbols, %d equations, %d goals",
        len(theory.datatypes),
        len(theory.funcs),
        len(theory.eqs),
        len(theory.goals),
    )
    return theory


def parse_lemmas(text: str, base: Theory) -> List[Equation]:
    """Parse a ``.lemmas.smt2`` file against ``base`` and return only its equations."""
    parsed = parse_theory(text, base)
    return [e for e in parsed.eqs[len(base.eqs):] if not e.name.endswith(".apply")]
