import itertools
import random
import time

import pytest

from Agents.Parseragent.smtlib import parse_lemmas
from Agents.Parseragent.terms import Equation, SymbolKind, uninterpreted, var
from Agents.Rewriteagent.egraph import EGraph
from Agents.Rewriteagent.rewrite import (
    RewriteRule,
    RuleError,
    RuleOrigin,
    SaturationAbort,
    SearchLimits,
    SearchTimeout,
    apply_split,
    compile_equation,
    compile_theory,
    detect_blocked_splits,
    lift_matches,
    rewrite_search,
    run_rewrites,
)
from tests.helpers import Interpreter, load, sample


@pytest.fixture(scope="module")
def nat():
    return load("nat.smt2")


@pytest.fixture(scope="module")
def lists():
    return load("lists.smt2")


def _nat_terms(theory):
    zero, succ, plus = (theory.lookup(n) for n in ("zero", "succ", "plus"))
    return zero, succ, plus


def test_definitions_compute(nat):
    zero, succ, plus = _nat_terms(nat)
    one = succ(zero())
    g = EGraph()
    a, b = g.add(plus(one, one)), g.add(succ(one))
    run_rewrites(g, compile_theory(nat).rules)
    assert g.equiv(a, b)


def test_rule_directions_follow_free_variables(nat):
    both, one_way = parse_lemmas(
        """
(assert (forall ((x Nat) (y Nat)) (= (plus x y) (plus y x))))
(assert (forall ((x Nat)) (= (plus x zero) x)))
""",
        nat,
    )
    assert [r.name for r in compile_equation(both)] == [str(both), f"{both}.rev"]
    rules = compile_equation(one_way, RuleOrigin.LEMMA)
    assert [str(r) for r in rules] == [f"{one_way}: (plus x zero) => x"]
    assert all(r.origin is RuleOrigin.LEMMA and not r.splits for r in rules)


@pytest.mark.parametrize("name", ["nat.smt2", "lists.smt2", "takedrop.smt2", "rev.smt2"])
def test_no_rule_has_a_bare_variable_premise(name):
    rules = compile_theory(load(name)).rules
    assert rules
    assert not [r.name for r in rules if r.premise.head.kind is SymbolKind.VARIABLE]


def test_equation_without_admissible_direction(nat):
    zero, succ, plus = _nat_terms(nat)
    x, y = var("x", zero().sort), var("y", zero().sort)
    eq = Equation(plus(x, zero()), plus(y, zero()), (("x", x.sort), ("y", y.sort)), "bad")
    with pytest.raises(RuleError):
        compile_equation(eq)


def test_rule_conclusion_must_not_invent_variables(nat):
    zero, _, _ = _nat_terms(nat)
    with pytest.raises(RuleError):
        RewriteRule("bad", zero(), var("x", zero().sort))


def test_match_lifted_to_matcher(lists):
    filter_cons = next(e for e in lists.eqs if e.name == "filter.2")
    main, *arms = lift_matches(filter_cons)
    assert main.rhs.head.kind is SymbolKind.MATCHER
    assert main.rhs.head.name == "filter.2-match1"
    assert [a.name for a in arms] == ["filter.2-match1.true", "filter.2-match1.false"]
    # the scrutinee first, then the variables the arms use
    assert [str(a) for a in main.rhs.args] == ["(@ p z)", "z", "p", "zs"]


def test_node_cap_aborts(nat):
    zero, succ, plus = _nat_terms(nat)
    comm = parse_lemmas("(assert (forall ((x Nat) (y Nat)) (= (plus x y) (plus y x))))", nat)
    rules = compile_theory(nat, comm).rules
    g = EGraph()
    x = uninterpreted("x", zero().sort)
    term = x
    for _ in range(6):
        term = plus(term, succ(x))
    g.add(term)
    with pytest.raises(SaturationAbort) as info:
        run_rewrites(g, rules, depth=8, node_cap=20)
    assert info.value.nodes > 20


def test_target_stops_early(nat):
    zero, succ, plus = _nat_terms(nat)
    g = EGraph()
    a, b = g.add(plus(zero(), zero())), g.add(zero())
    run_rewrites(g, compile_theory(nat).rules, target=(a, b))
    assert g.equiv(a, b)


def _filter_twice(lists):
    filter_ = lists.lookup("filter")
    cons, nil = lists.lookup("cons"), lists.lookup("nil")
    elem_sort = cons.arg_sorts[0]
    p = uninterpreted("p", filter_.arg_sorts[0])
    once = filter_(p, cons(uninterpreted("e", elem_sort), nil()))
    return filter_(p, once), once


def test_blocked_matcher_gets_split(lists):
    rules = compile_theory(lists)
    twice, once = _filter_twice(lists)
    g = EGraph()
    g.add(twice)
    run_rewrites(g, rules.rules)
    splits = detect_blocked_splits(g, rules)
    assert [s.sort.name for s in splits] == ["Bool"]
    assert [str(a) for a in splits[0].alternatives] == ["true", "false"]


def test_case_split_closes_what_rewriting_cannot(lists):
    rules = compile_theory(lists)
    twice, once = _filter_twice(lists)
    g = EGraph()
    a, b = g.add(twice), g.add(once)
    rewrite_search(g, rules, case_split=False)
    assert not g.equiv(a, b)
    rewrite_search(g, rules, case_split=True)
    assert g.equiv(a, b)


def test_split_on_multi_constructor_rule():
    theory = load("takedrop.smt2")
    rules = compile_theory(theory)
    take, succ, zero = theory.lookup("take"), theory.lookup("succ"), theory.lookup("zero")
    xs = uninterpreted("xs", take.arg_sorts[1])
    g = EGraph()
    g.add(take(succ(zero()), xs))
    SearchLimits(case_split=False).saturate(g, rules)
    splits = detect_blocked_splits(g, rules)
    assert [s.scrutinee for s in splits] == [g.find(g.lookup(xs))]
    assert [a.head.name for a in splits[0].alternatives] == ["nil", "cons"]


def test_split_depth_zero_disables_splits(lists):
    rules = compile_theory(lists)
    twice, once = _filter_twice(lists)
    g = EGraph()
    a, b = g.add(twice), g.add(once)
    SearchLimits(split_depth=0).search(g, rules)
    assert not g.equiv(a, b)


def test_lemma_rules_never_split(nat):
    zero, succ, plus = _nat_terms(nat)
    lemmas = parse_lemmas(
        "(assert (forall ((x Nat) (y Nat)) (= (plus (succ x) (succ y)) (succ (succ (plus x y))))))", nat
    )
    rules = compile_theory(nat, lemmas)
    g = EGraph()
    g.add(plus(succ(uninterpreted("a", zero().sort)), uninterpreted("b", zero().sort)))
    SearchLimits(case_split=False).saturate(g, rules)
    assert detect_blocked_splits(g, rules) == []


def test_split_only_keeps_merges_every_case_agrees_on(lists):
    rules = compile_theory(lists)
    twice, once = _filter_twice(lists)
    g = EGraph()
    g.add(twice)
    g.add(once)
    run_rewrites(g, rules.rules)
    (split,) = detect_blocked_splits(g, rules)
    branches = []
    for alternative in split.alternatives:
        branch = g.clone()
        branch.merge(branch.add(alternative), split.scrutinee)
        rewrite_search(branch, rules)
        branches.append(branch)
    after = g.clone()
    assert apply_split(after, split, rules) > 0
    for a, b in itertools.combinations(g.class_ids(), 2):
        if after.equiv(a, b) and not g.equiv(a, b):
            assert all(branch.equiv(a, b) for branch in branches), (a, b)


def test_nested_split_on_scrutinee_found_inside_a_case(lists):
    rules = compile_theory(lists)
    filter_ = lists.lookup("filter")
    cons, nil = lists.lookup("cons"), lists.lookup("nil")
    elem_sort = cons.arg_sorts[0]
    p = uninterpreted("p", filter_.arg_sorts[0])
    pair = cons(uninterpreted("e1", elem_sort), cons(uninterpreted("e2", elem_sort), nil()))
    g = EGraph()
    a, b = g.add(filter_(p, filter_(p, pair))), g.add(filter_(p, pair))
    SearchLimits(split_depth=1).search(g, rules)
    assert not g.equiv(a, b)
    SearchLimits(split_depth=2).search(g, rules)
    assert g.equiv(a, b)


def test_passed_deadline_stops_search(lists):
    rules = compile_theory(lists)
    twice, _ = _filter_twice(lists)
    g = EGraph()
    g.add(twice)
    with pytest.raises(SearchTimeout):
        SearchLimits(deadline=time.monotonic() - 1).search(g, rules)


def _random_ground(theory, sort, rng, depth):
    callers = [f for f in theory.funcs if not f.is_constructor and f.ret_sort == sort]
    if depth > 0 and callers and rng.random() < 0.5:
        f = rng.choice(callers)
        return f(*(_random_ground(theory, s, rng, depth - 1) for s in f.arg_sorts))
    return sample(theory, sort, rng, depth=1)


@pytest.mark.parametrize("name", ["nat.smt2", "rev.smt2"])
def test_merged_ground_terms_evaluate_equal(name):
    theory = load(name)
    rules = compile_theory(theory).rules
    sort = theory.datatypes[-1].sort
    rng = random.Random(11)
    for _ in range(125):
        g = EGraph()
        terms = [_random_ground(theory, sort, rng, 3) for _ in range(4)]
        ids = [g.add(t) for t in terms]
        run_rewrites(g, rules)
        values = [Interpreter(theory).eval(t) for t in terms]
        for i, j in itertools.combinations(range(len(terms)), 2):
            if g.equiv(ids[i], ids[j]):
                assert values[i] == values[j], (terms[i], terms[j])
