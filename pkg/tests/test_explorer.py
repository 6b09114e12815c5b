import time

import pytest

from Agents.Exploreragent.explorer import (
    ConfigError,
    ExplorerConfig,
    Session,
    explore,
    load_seed_lemmas,
    prove_goals,
    subsumption_ratio,
)
from Agents.Inferenceagent.soe import Conjecture, conjectures_from
from Agents.Parseragent.smtlib import parse_lemmas, parse_theory
from Agents.Parseragent.terms import placeholder
from Agents.Proveragent.prover import Lemma, prove
from Agents.Rewriteagent.rewrite import compile_theory
from tests.helpers import BENCHMARKS, holds, load


def goal_theory(name):
    return parse_theory((BENCHMARKS / "goals" / f"{name}.smt2").read_text(encoding="utf-8"))


@pytest.fixture(scope="module")
def nat():
    return load("nat.smt2")


@pytest.fixture(scope="module")
def nat_run(nat):
    events = []
    lemmas, stats = explore(nat, ExplorerConfig(term_depth=2), events)
    return lemmas, stats, events


def test_explored_lemmas_hold(nat, nat_run):
    lemmas, _, _ = nat_run
    assert lemmas
    for lemma in lemmas:
        assert holds(nat, lemma.equation), str(lemma)


def test_lemmas_numbered_in_discovery_order(nat_run):
    lemmas, stats, _ = nat_run
    assert [lemma.equation.name for lemma in lemmas] == [f"lemma{i}" for i in range(1, len(lemmas) + 1)]
    assert stats.lemmas == [str(lemma) for lemma in lemmas]
    assert stats.conjectures["proved"] == len(lemmas)


def test_commutativity_and_associativity_follow(nat, nat_run):
    lemmas, _, _ = nat_run
    goals = parse_lemmas(
        """
(assert (forall ((x Nat) (y Nat)) (= (plus x y) (plus y x))))
(assert (forall ((x Nat) (y Nat) (z Nat)) (= (plus x (plus y z)) (plus (plus x y) z))))
""",
        nat,
    )
    assert subsumption_ratio(goals, [lemma.equation for lemma in lemmas], nat) == 1.0


def test_only_the_generalization_is_admitted(nat_run):
    lemmas, _, _ = nat_run
    texts = {str(lemma) for lemma in lemmas}
    assert "(plus (plus nat1 nat2) nat1) = (plus nat1 (plus nat2 nat1))" not in texts
    assert "(plus nat1 (plus nat2 nat1)) = (plus (plus nat1 nat2) nat1)" not in texts


def test_events_record_conjectures_and_lemmas(nat_run):
    lemmas, _, events = nat_run
    kinds = {e["event"] for e in events}
    assert {"conjecture", "lemma"} <= kinds
    assert [e["detail"] for e in events if e["event"] == "lemma"] == [str(lemma) for lemma in lemmas]


def test_stats_to_dict(nat_run):
    _, stats, _ = nat_run
    data = stats.to_dict()
    assert set(data["phase_times"]) == {"generation", "inference", "screening", "proving"}
    assert data["truncated"] is False


def test_zero_timeout_truncates(nat):
    lemmas, stats = explore(nat, ExplorerConfig(timeout=0))
    assert stats.truncated
    assert lemmas == []


def test_config_from_environment(monkeypatch):
    monkeypatch.setenv("THESY_TIMEOUT", "5")
    assert ExplorerConfig.from_env().timeout == 5.0
    assert ExplorerConfig.from_env(timeout=2).timeout == 2
    monkeypatch.setenv("THESY_TIMEOUT", "soon")
    assert ExplorerConfig.from_env().timeout is None


def test_negative_config_rejected():
    with pytest.raises(ConfigError):
        ExplorerConfig(term_depth=-1)


def test_seed_lemmas_loaded(nat, tmp_path):
    (tmp_path / "nat.lemmas.smt2").write_text("(assert (forall ((x Nat)) (= (plus x zero) x)))\n")
    (tmp_path / "broken.lemmas.smt2").write_text("(assert (forall ((x Nat)) (= (times x zero) x)))\n")
    (tmp_path / "notes.txt").write_text("ignored")
    seeded = load_seed_lemmas(nat, str(tmp_path))
    assert len(seeded.eqs) == len(nat.eqs) + 1
    assert load_seed_lemmas(nat, str(tmp_path / "missing")) is nat


def test_goal_proved_with_case_split():
    results, stats = prove_goals(goal_theory("take_drop"), ExplorerConfig(term_depth=1))
    assert [r.proved for r in results] == [True]
    assert not stats.truncated


def test_goal_fails_without_case_split():
    results, _ = prove_goals(goal_theory("take_drop"), ExplorerConfig(term_depth=1, case_split=False))
    assert [r.proved for r in results] == [False]


def test_goal_retried_after_lemmas():
    results, stats = prove_goals(goal_theory("plus_comm"), ExplorerConfig(term_depth=2))
    assert results[0].proved
    assert stats.conjectures["retried"] >= 1
    assert stats.lemmas


def test_subsumption_edge_cases(nat):
    right_identity = parse_lemmas("(assert (forall ((x Nat)) (= (plus x zero) x)))", nat)
    assert subsumption_ratio([], right_identity, nat) == 1.0
    assert subsumption_ratio(right_identity, [], nat) == 0.0
    assert subsumption_ratio(right_identity, right_identity, nat) == 1.0


def test_two_runs_are_identical(nat, nat_run):
    lemmas, stats, events = nat_run
    again = []
    lemmas2, stats2 = explore(nat, ExplorerConfig(term_depth=2), again)
    assert [str(lemma) for lemma in lemmas2] == [str(lemma) for lemma in lemmas]
    assert stats2.conjectures == stats.conjectures
    assert again == events


def test_admit_merges_only_the_proved_conjecture(nat):
    plus = nat.lookup("plus")
    p1, p2 = (placeholder(i, nat.datatypes[0].sort) for i in (1, 2))
    lemma = prove(Conjecture.make(plus(p1, plus(p2, p1)), plus(plus(p1, p2), p1)), compile_theory(nat))
    assert isinstance(lemma, Lemma)
    assert lemma.generalization.key != lemma.conjecture.key
    session = Session(nat, ExplorerConfig(term_depth=0))
    g = session.state.egraph
    session.admit(lemma)
    assert g.equiv(g.lookup(lemma.conjecture.lhs), g.lookup(lemma.conjecture.rhs))
    assert g.lookup(lemma.generalization.lhs) is None or g.lookup(lemma.generalization.rhs) is None


def test_short_timeout_returns_quickly():
    start = time.monotonic()
    lemmas, stats = explore(load("lists.smt2"), ExplorerConfig(timeout=1.0))
    assert stats.truncated
    assert time.monotonic() - start < 60


@pytest.fixture(scope="module")
def lists_run():
    start = time.monotonic()
    lemmas, stats = explore(load("lists.smt2"))
    return lemmas, stats, time.monotonic() - start


LISTS_GOLDEN = """
(assert (par (a) (forall ((p (=> a Bool)) (xs (List a))) (= (filter p (filter p xs)) (filter p xs)))))
(assert (par (a) (forall ((xs (List a)) (ys (List a)) (zs (List a))) (= (++ xs (++ ys zs)) (++ (++ xs ys) zs)))))
(assert (par (a) (forall ((p (=> a Bool)) (xs (List a)) (ys (List a)))
  (= (filter p (++ xs ys)) (++ (filter p xs) (filter p ys))))))
"""


def test_lists_running_example_lemmas(lists_run):
    lists = load("lists.smt2")
    lemmas, stats, elapsed = lists_run
    golden = parse_lemmas(LISTS_GOLDEN, lists)
    assert subsumption_ratio(golden, [lemma.equation for lemma in lemmas], lists) == 1.0
    assert not stats.truncated
    assert elapsed < 300


@pytest.mark.parametrize("name", ["lists.smt2", "tree.smt2"])
def test_admitted_lemmas_hold_on_ground_values(name, lists_run):
    theory = load(name)
    lemmas = lists_run[0] if name == "lists.smt2" else explore(theory)[0]
    assert lemmas
    for lemma in lemmas:
        assert holds(theory, lemma.equation), str(lemma)


def test_rev_lemmas_use_append_associativity_first():
    rev = load("rev.smt2")
    events = []
    start = time.monotonic()
    lemmas, _ = explore(rev, ExplorerConfig(), events)
    assert time.monotonic() - start < 600
    found = [lemma.equation for lemma in lemmas]
    assoc, distrib, involution = parse_lemmas(
        """
(assert (par (a) (forall ((xs (List a)) (ys (List a)) (zs (List a))) (= (++ xs (++ ys zs)) (++ (++ xs ys) zs)))))
(assert (par (a) (forall ((xs (List a)) (ys (List a))) (= (rev (++ xs ys)) (++ (rev ys) (rev xs))))))
(assert (par (a) (forall ((xs (List a))) (= (rev (rev xs)) xs))))
""",
        rev,
    )
    assert subsumption_ratio([distrib, involution], found, rev) == 1.0
    first_assoc = next(i for i in range(len(found)) if subsumption_ratio([assoc], found[: i + 1], rev) == 1.0)
    lemma_events = [i for i, e in enumerate(events) if e["event"] == "lemma"]
    distrib_key = conjectures_from([distrib])[0].key
    emitted = [i for i, e in enumerate(events) if e["event"] == "conjecture" and e["detail"] == distrib_key]
    assert emitted
    assert lemma_events[first_assoc] < emitted[0]


def test_nat_with_three_placeholders():
    nat = load("nat.smt2")
    start = time.monotonic()
    lemmas, _ = explore(nat, ExplorerConfig(ph_count=3))
    assert time.monotonic() - start < 300
    goals = parse_lemmas(
        """
(assert (forall ((x Nat) (y Nat)) (= (plus x y) (plus y x))))
(assert (forall ((x Nat) (y Nat) (z Nat)) (= (plus x (plus y z)) (plus (plus x y) z))))
""",
        nat,
    )
    assert subsumption_ratio(goals, [lemma.equation for lemma in lemmas], nat) == 1.0
    texts = {str(lemma) for lemma in lemmas}
    assert "(plus nat1 (plus nat2 nat1)) = (plus (plus nat1 nat2) nat1)" not in texts
    assert "(plus (plus nat1 nat2) nat1) = (plus nat1 (plus nat2 nat1))" not in texts


def test_fold_sum_needs_a_retry():
    start = time.monotonic()
    results, stats = prove_goals(goal_theory("fold_sum"))
    assert [r.proved for r in results] == [True]
    assert stats.conjectures["retried"] >= 1
    assert time.monotonic() - start < 600


def test_goal_corpus():
    files = sorted((BENCHMARKS / "goals").glob("*.smt2"))
    proved = 0
    for path in files:
        start = time.monotonic()
        results, _ = prove_goals(parse_theory(path.read_text(encoding="utf-8")), ExplorerConfig(timeout=300))
        assert time.monotonic() - start < 360, path.name
        proved += all(r.proved for r in results)
    assert len(files) == 12
    assert proved >= 9
