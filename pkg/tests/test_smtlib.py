import pytest

from Agents.Parseragent.smtlib import (
    ParseError,
    desugar,
    parse_lemmas,
    parse_theory,
    serialize_lemmas,
)
from Agents.Parseragent.terms import BOOL, SymbolKind, ite, uninterpreted
from tests.helpers import BENCHMARKS, load

NAT = """
(declare-datatypes ((Nat 0)) (((zero) (succ (pred Nat)))))
(define-fun-rec plus ((x Nat) (y Nat)) Nat
  (match x ((zero y) ((succ n) (succ (plus n y))))))
"""


def test_lists_theory_has_four_equations():
    theory = load("lists.smt2")
    assert [dt.sort.name for dt in theory.datatypes] == ["List"]
    assert {f.name for f in theory.funcs} >= {"nil", "cons", "++", "filter"}
    assert [e.name for e in theory.eqs] == ["++.1", "++.2", "filter.1", "filter.2"]
    assert theory.goals == []


def test_ite_becomes_match_on_bool():
    theory = load("lists.smt2")
    filter_cons = next(e for e in theory.eqs if e.name == "filter.2")
    assert filter_cons.rhs.head.kind is SymbolKind.MATCH
    assert [p.head.name for p in filter_cons.rhs.cases] == ["true", "false"]


def test_nested_match_splits_into_constructor_equations():
    theory = load("takedrop.smt2")
    take = [str(e) for e in theory.eqs if e.name.startswith("take.")]
    assert take == [
        "(take zero xs) = nil",
        "(take (succ m) nil) = nil",
        "(take (succ m) (cons y ys)) = (cons y (take m ys))",
    ]


def test_every_goal_file_parses_with_one_goal():
    files = sorted((BENCHMARKS / "goals").glob("*.smt2"))
    assert len(files) == 12
    for path in files:
        theory = parse_theory(path.read_text(encoding="utf-8"))
        assert len(theory.goals) == 1, path.name


def test_function_used_as_value_gets_apply_equation():
    theory = parse_theory((BENCHMARKS / "goals" / "fold_sum.smt2").read_text(encoding="utf-8"))
    assert [f.name for f in theory.fun_refs] == ["plus"]
    apply_eq = next(e for e in theory.eqs if e.name == "plus.apply")
    assert str(apply_eq) == "(@ plus x1 x2) = (plus x1 x2)"


def test_wildcard_arm_covers_remaining_constructors():
    text = NAT + """
(define-fun pos ((x Nat)) Nat (match x ((zero zero) (_ (succ zero)))))
"""
    theory = parse_theory(text)
    pos = [str(e) for e in theory.eqs if e.name.startswith("pos.")]
    assert pos[0] == "(pos zero) = zero"
    assert pos[1].startswith("(pos (succ _w")


def test_unknown_symbol_reports_position():
    text = NAT + "(assert (forall ((x Nat)) (= (times x zero) zero)))\n"
    with pytest.raises(ParseError) as info:
        parse_theory(text)
    assert "times" in info.value.message
    assert info.value.line == 5


def test_non_equational_assertion_rejected():
    with pytest.raises(ParseError, match="non-equational"):
        parse_theory(NAT + "(assert (forall ((x Nat)) (distinct x zero)))")


def test_non_constructor_pattern_rejected():
    text = NAT + "(define-fun f ((x Nat)) Nat (match x (((plus y z) zero))))"
    with pytest.raises(ParseError, match="not a constructor"):
        parse_theory(text)


def test_datatype_needs_base_constructor():
    with pytest.raises(ParseError, match="base constructor"):
        parse_theory("(declare-datatypes ((S 0)) (((mk (f S)))))")


def test_unbalanced_input():
    with pytest.raises(ParseError) as info:
        parse_theory("(declare-datatypes ((Nat 0)) (((zero) (succ (pred Nat))))")
    assert info.value.line == 1


def test_failed_parse_leaves_base_untouched():
    base = parse_theory(NAT)
    before = list(base.eqs)
    with pytest.raises(ParseError):
        parse_theory("(assert (forall ((x Nat)) (= (plus x zero) x)))\n(oops)", base)
    assert base.eqs == before


def test_lemma_file_reads_back():
    base = parse_theory(NAT)
    text = """
(assert (forall ((x Nat)) (= (plus x zero) x)))
(assert (forall ((x Nat) (y Nat)) (= (plus x (succ y)) (succ (plus x y)))))
(assert (= (plus zero zero) zero))
"""
    lemmas = parse_lemmas(text, base)
    assert len(lemmas) == 3
    written = serialize_lemmas(lemmas)
    assert written.splitlines() == [
        "(assert (forall ((x Nat)) (= (plus x zero) x)))",
        "(assert (= (plus zero zero) zero))",
        "(assert (forall ((x Nat) (y Nat)) (= (plus x (succ y)) (succ (plus x y)))))",
    ]
    assert parse_lemmas(written, base) == sorted(lemmas, key=lambda e: e.order_key)


def test_serialize_nothing():
    assert serialize_lemmas([]) == ""


def test_goal_forms():
    for goal in (
        "(prove (forall ((x Nat)) (= (plus x zero) x)))",
        "(assert-not (forall ((x Nat)) (= (plus x zero) x)))",
        "(assert (not (forall ((x Nat)) (= (plus x zero) x))))",
    ):
        theory = parse_theory(NAT + goal)
        assert [str(g) for g in theory.goals] == ["(plus x zero) = x"]


def test_desugar_is_idempotent():
    theory = load("lists.smt2")
    for eq in theory.eqs:
        assert desugar(eq.lhs) == eq.lhs
        assert desugar(eq.rhs) == eq.rhs
    nat = parse_theory(NAT)
    zero, succ = nat.lookup("zero"), nat.lookup("succ")
    cond = uninterpreted("c", BOOL)
    once = desugar(ite(cond, zero(), succ(zero())))
    assert once.head.kind is SymbolKind.MATCH
    assert desugar(once) == once


def test_polymorphic_lemma_reads_back():
    base = load("rev.smt2")
    lemmas = parse_lemmas(
        "(assert (par (a) (forall ((xs (List a)) (ys (List a))) "
        "(= (rev (++ xs ys)) (++ (rev ys) (rev xs))))))",
        base,
    )
    written = serialize_lemmas(lemmas)
    assert written == "(assert (forall ((xs (List a)) (ys (List a))) (= (rev (++ xs ys)) (++ (rev ys) (rev xs)))))\n"
    assert parse_lemmas(written, base) == lemmas
