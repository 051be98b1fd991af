from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import pytest
from hypothesis import given

from timed_learn.core import Automaton, Transition, Point, accepts, complete_with_sink, make_word
from timed_learn.teacher import ScriptedTeacher, SimulatedTeacher, Teacher, queued_counterexamples
from timed_learn.transform import canonicalize

from conftest import fixture
from strategies import automata, words

ACCEPT = make_word(("1/2", "a"), ("3/2", "a"))


def test_simulated_teacher_examples():
    t = SimulatedTeacher(fixture("xa_ya"))
    assert t.member(ACCEPT)
    assert not t.member(make_word(("1/2", "a"), (1, "a")))
    assert t.equivalence(fixture("xa_ya")).equivalent
    assert SimulatedTeacher(fixture("xa_yb")).reset(make_word(("3/10", "a"))) == Fraction(3, 10)
    assert t.reset(()) == 0


def test_counters_count_every_call_including_cache_hits():
    t = SimulatedTeacher(fixture("xa_ya"))
    for _ in range(3):
        t.member(ACCEPT)
    t.equivalence(fixture("a_t2"))
    t.reset(ACCEPT)
    assert (t.membership_queries, t.equivalence_queries, t.reset_queries) == (3, 1, 1)


def test_cache_does_not_change_answers():
    cached, plain = SimulatedTeacher(fixture("a_s")), SimulatedTeacher(fixture("a_s"), cache=False)
    for w in (make_word(("1/2", "a"), (0, "b")), make_word(("1/2", "a"), ("1/4", "b")), ()):
        assert cached.member(w) == plain.member(w) == cached.member(w)


def test_nondeterministic_target_rejected():
    a = Automaton.build(["a"], ["q"], "q", [], [
        Transition("q", "q", "a", Point(0), 0), Transition("q", "q", "a", Point(0), 1)], 0)
    with pytest.raises(ValueError):
        SimulatedTeacher(a)


def test_plain_teacher_has_no_reset():
    t = ScriptedTeacher(lambda w: False, lambda c: None)
    assert not t.supports_reset
    with pytest.raises(NotImplementedError):
        t.reset(())
    with pytest.raises(NotImplementedError):
        Teacher().member(())


def test_scripted_teacher_replays_then_falls_back():
    sim = SimulatedTeacher(fixture("xa_ya"))
    replay = queued_counterexamples([ACCEPT], fallback=sim)
    t = ScriptedTeacher(sim.member, replay)
    first = t.equivalence(fixture("a_t2"))
    assert first.word == ACCEPT and first.accepted_by == 0
    assert t.equivalence(fixture("a_t2")).equivalent
    wrong = fixture("a_t1")
    assert not t.equivalence(wrong).equivalent


def test_concurrent_queries_are_all_counted():
    t = SimulatedTeacher(fixture("xa_ya"))
    batch = [make_word((f"{i}/7", "a"), ("3/2", "a")) for i in range(50)]
    with ThreadPoolExecutor(8) as pool:
        answers = list(pool.map(t.member, batch * 4))
    assert t.membership_queries == 200
    assert answers == [accepts(complete_with_sink(fixture("xa_ya")), w) for w in batch * 4]


@given(automata(), words())
def test_reset_values_avoid_positive_integers(a, u):
    t = SimulatedTeacher(a)
    k = canonicalize(a).k
    v = t.reset(u)
    assert 0 <= v <= k
    assert v == 0 or v.denominator != 1
    assert t.reset(()) == 0


@given(automata(), automata())
def test_equivalence_counterexamples_are_genuine(target, candidate):
    t = SimulatedTeacher(target)
    verdict = t.equivalence(candidate)
    if not verdict.equivalent:
        assert accepts(candidate, verdict.word) != t.member(verdict.word)
