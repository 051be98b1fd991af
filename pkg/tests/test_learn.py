from fractions import Fraction

import pytest
from hypothesis import given, settings

from timed_learn.core import (
    ZERO, Automaton, Transition, accepts, all_regions, complete_with_sink, format_word, isomorphic, make_word, run, validate,
)
from timed_learn.equiv import equivalent
from timed_learn.learn import (
    Caps, CapExceeded, ObservationTable, add_rows, conjecture, fill_table, initial_table, is_closed,
    is_consistent, is_valid, learn, learn_normal, learn_smart, next_action,
    postprocess_to_canonical, process_step, refine_smart, reset_assignments, reset_options,
)
from timed_learn.reset import enumerate_normal_forms
from timed_learn.teacher import ScriptedTeacher, SimulatedTeacher, queued_counterexamples
from timed_learn.transform import canonicalize

from conftest import fixture
from strategies import automata

F = Fraction
HALF_A = make_word(("1/2", "a"))
ACCEPT = make_word(("1/2", "a"), ("3/2", "a"))
GOLDEN_CEX = make_word((0, "a"), ("1/2", "a"), ("3/2", "a"))


def w(*pairs):
    return make_word(*pairs)


def cells(t, word):
    return t.row(word)


def is_strict(a):
    return not any(tr.guard.is_point() and tr.guard.n >= 1 and tr.reset == 1
                   for tr in a.transitions)


@pytest.fixture
def target():
    return fixture("xa_ya")


@pytest.fixture
def smart(target):
    return SimulatedTeacher(target)


def recorder():
    events = []
    return events, lambda kind, t: events.append((kind, t.copy()))


# -- smart teacher golden run ------------------------------------------------

def scripted_smart(sim):
    return ScriptedTeacher(sim.member, queued_counterexamples([GOLDEN_CEX]), sim.reset)


def test_smart_golden_run(smart):
    events, observe = recorder()
    result, stats = learn_smart(scripted_smart(smart), ["a"], observe=observe)
    kinds = [k for k, _ in events]
    assert kinds == ["initial", "valid", "close", "close", "consistent-b", "conjecture",
                     "counterexample", "column", "conjecture"]
    tables = [t for _, t in events]

    t0 = tables[0]
    assert (t0.k, t0.S, t0.E) == (0, ((),), ((),))
    assert [cells(t0, u) for u in [(), w((0, "a")), HALF_A]] == [
        ((0, 0),), ((0, 0),), ((0, F(1, 2)),)]
    assert not is_valid(t0)

    t0p = tables[1]
    assert (t0p.k, t0p.S) == (1, ((),))
    assert {u: cells(t0p, u) for u in t0p.row_words()} == {
        (): ((0, 0),), w((0, "a")): ((0, 0),), HALF_A: ((0, F(1, 2)),),
        w((1, "a")): ((0, 0),), w(("3/2", "a")): ((0, 0),)}

    t0pp = tables[2]
    assert t0pp.S == ((), HALF_A)
    for d in ("0", "1/2", "1"):
        assert cells(t0pp, HALF_A + w((d, "a"))) == ((0, 0),)
    assert cells(t0pp, ACCEPT) == ((1, 0),)
    assert is_closed(t0pp) == (False, ACCEPT)

    t1, t1k2 = tables[3], tables[4]
    assert t1.S == ((), HALF_A, ACCEPT) and t1.k == 1
    ok, kind, witness = is_consistent(t1)
    assert (ok, kind) == (False, "b")
    assert witness == HALF_A + w((1, "a"))
    assert t1k2.k == 2 and t1k2.S == t1.S and next_action(t1k2) is None
    assert all(cells(t1k2, u) == ((0, 0),) for u in t1k2.extensions())
    assert isomorphic(conjecture(t1k2), fixture("a_t1"))

    refined = tables[6]
    assert refined.S == ((), HALF_A, ACCEPT, w((0, "a")), w((0, "a"), ("1/2", "a")), GOLDEN_CEX)
    assert next_action(refined)[0] == "column"

    t2 = tables[7]
    assert t2.E == ((), HALF_A) and t2.k == 2
    expected = {
        (): ((0, 0), (0, F(1, 2))),
        HALF_A: ((0, F(1, 2)), (0, 0)),
        ACCEPT: ((1, 0), (0, 0)),
        w((0, "a")): ((0, 0), (0, 0)),
        w((0, "a"), ("1/2", "a")): ((0, 0), (0, 0)),
        GOLDEN_CEX: ((0, 0), (0, 0)),
    }
    assert {s: cells(t2, s) for s in t2.S} == expected
    assert all(cells(t2, u) == ((0, 0), (0, 0)) for u in t2.extensions())

    assert isomorphic(result, fixture("a_t2"))
    assert stats.tables_processed == 5 <= 6
    assert stats.equivalence_queries == 2


def test_smart_unscripted_matches_the_canonical_acceptor(target, smart):
    result, stats = learn_smart(smart, ["a"])
    assert isomorphic(result, fixture("a_t2"))
    assert isomorphic(result, canonicalize(target))
    assert stats.tables_processed <= 6
    assert stats.membership_queries == smart.membership_queries


@pytest.mark.parametrize("name", ["a_s", "a_q", "xa_yb", "min_top"])
def test_smart_learns_the_canonical_acceptor(name):
    target = fixture(name)
    result, _ = learn_smart(SimulatedTeacher(target), target.alphabet)
    assert validate(result) == []
    assert is_strict(result)
    assert equivalent(result, complete_with_sink(target)).equivalent
    assert isomorphic(result, canonicalize(target))


def test_smart_empty_language():
    nothing = Automaton.build(["a", "b"], ["q"], "q", [], [], 0)
    result, stats = learn_smart(SimulatedTeacher(nothing), ["a", "b"])
    assert len(result.states) == 1 and not result.accepting
    assert stats.equivalence_queries == 1


def test_smart_respects_the_constant_cap(smart):
    with pytest.raises(CapExceeded):
        learn_smart(smart, ["a"], caps=Caps(max_k=1))


def test_smart_respects_the_table_cap(smart):
    with pytest.raises(CapExceeded):
        learn_smart(smart, ["a"], caps=Caps(max_tables=2))


# -- table operations -----------------------------------------------------------

def test_process_step_follows_the_action_order(smart):
    t = fill_table(initial_table(["a"]), smart)
    steps = []
    while next_action(t) is not None:
        steps.append((next_action(t)[0], t.k))
        t = process_step(t, smart)
    assert steps == [("valid", 0), ("close", 1), ("close", 1), ("consistent-b", 1)]
    assert t.k == 2 and len(t.S) == 3
    with pytest.raises(ValueError):
        process_step(t, smart)


def test_refine_smart_adds_the_syntactic_normal_form(smart):
    t = initial_table(["a"])
    t = refine_smart(t, w(("3/10", "a"), ("17/10", "a")), smart)
    # reset after the first letter is 3/10, so 1.7 more lands on x=2
    assert t.S == ((), w(("1/2", "a")), w(("1/2", "a"), ("3/2", "a")))
    assert not t.missing()


def test_conjecture_requires_a_finished_table(smart):
    t = fill_table(initial_table(["a"]), smart)
    with pytest.raises(ValueError):
        conjecture(t)


def test_add_rows_adds_prefixes_once():
    t = add_rows(initial_table(["a"]), [ACCEPT, HALF_A])
    assert t.S == ((), HALF_A, ACCEPT)


def test_validity():
    t = ObservationTable(k=1, alphabet=("a",), cells={(): (0, F(0)), HALF_A: (0, F(1))})
    assert not is_valid(t)
    t.cells[HALF_A] = (0, F(1, 2))
    assert is_valid(t)
    t.cells[HALF_A] = (0, F(3, 2))
    assert not is_valid(t)


# -- normal teacher -------------------------------------------------------------

def test_reset_options():
    assert reset_options(HALF_A, F(0)) == [0, F(1, 2)]
    assert reset_options(w((1, "a")), F(0)) == [0]
    assert reset_options(w(("3/2", "a")), F(1, 2)) == [0]
    assert reset_options(w(("5/2", "a")), F(0), max_value=2) == [0]


def test_reset_assignments_enumerate_every_guess():
    t = ObservationTable(k=0, alphabet=("a",))
    guesses = list(reset_assignments(t))
    assert guesses == [{w((0, "a")): 0, HALF_A: 0}, {w((0, "a")): 0, HALF_A: F(1, 2)}]


def test_normal_bad_branch_golden_run(smart):
    cexs = [ACCEPT, w(("1/2", "a"), (2, "a")), w(("1/5", "a"), ("13/10", "a"))]
    assert enumerate_normal_forms(cexs[2]) == {ACCEPT, w(("1/2", "a"), (1, "a"))}
    teacher = ScriptedTeacher(smart.member, queued_counterexamples(cexs))
    events, observe = recorder()
    result, stats = learn_normal(teacher, ["a"], choose=lambda word, options: [0], observe=observe)
    tables = [t for _, t in events]
    for t in tables:
        assert all(r == 0 for _, r in t.cells.values())

    def bits(t):
        return {s: tuple(b for b, _ in t.row(s)) for s in t.S}

    def rest_zero(t):
        return all(set(t.row(u)) == {(0, 0)} for u in t.extensions())

    t0 = tables[0]
    assert t0.k == 0 and bits(t0) == {(): (0,)} and rest_zero(t0)
    assert not conjecture(t0).accepting

    t0p = tables[1]
    assert t0p.k == 0 and bits(t0p) == {(): (0,), HALF_A: (0,), ACCEPT: (1,)} and rest_zero(t0p)
    assert next_action(t0p)[0] == "consistent-b"
    assert next_action(tables[2])[0] == "column"

    e = w(("3/2", "a"))
    e2 = HALF_A + e
    t0pp = tables[3]
    assert (t0pp.k, t0pp.E) == (1, ((), e))
    assert bits(t0pp) == {(): (0, 0), HALF_A: (0, 1), ACCEPT: (1, 0)} and rest_zero(t0pp)
    hyp = conjecture(t0pp)
    assert isomorphic(hyp, fixture("bad_t0_2"))
    assert accepts(hyp, cexs[1]) and not smart.member(cexs[1])

    t0ppp = tables[6]
    assert (t0ppp.k, t0ppp.E) == (2, ((), e, e2))
    assert bits(t0ppp) == {
        (): (0, 0, 1), HALF_A: (0, 1, 0), ACCEPT: (1, 0, 0), w(("1/2", "a"), (2, "a")): (0, 0, 0)}
    assert rest_zero(t0ppp)
    wrong = conjecture(t0ppp)
    assert isomorphic(wrong, fixture("bad_t0_3"))
    assert not equivalent(wrong, fixture("a_t2")).equivalent

    after = tables[7]
    assert set(after.S) - set(t0ppp.S) == {w(("1/2", "a"), (1, "a"))}
    assert isomorphic(conjecture(after), fixture("bad_t0_3"))
    assert isomorphic(result, fixture("bad_t0_3"))
    assert stats.equivalence_queries == 4


def test_normal_shadow_branch_learns_the_language(target, smart):
    """Guessing exactly the syntactic resets reaches a correct acceptor."""
    choose = lambda word, options: [smart.reset(word)]
    teacher = SimulatedTeacher(target)
    result, stats = learn_normal(teacher, ["a"], choose=choose)
    assert is_strict(result) and validate(result) == []
    assert equivalent(result, complete_with_sink(target)).equivalent
    assert isomorphic(postprocess_to_canonical(result, teacher), fixture("a_t2"))


def test_normal_empty_language():
    nothing = Automaton.build(["a"], ["q"], "q", [], [], 1)
    result, stats = learn_normal(SimulatedTeacher(nothing), ["a"])
    assert not result.accepting
    assert stats.pool_peak == 2


def test_normal_pool_cap(smart):
    with pytest.raises(CapExceeded):
        learn_normal(smart, ["a"], caps=Caps(max_pool=3))


def test_postprocess_reaches_the_canonical_acceptor(target):
    """A correct but redundant strict acceptor is reduced using equivalence queries only."""
    t2 = fixture("a_t2")
    sinks = {"eps": "s1", "half": "s2", "acc": "s3", "sink": "s1"}
    loops = [Transition(q, q, "a", g, 0) for q in ("s2", "s3") for g in all_regions(2)]
    bloated = t2.replace(
        states=("eps", "half", "acc", "s1", "s2", "s3"),
        regions={**{q: t2.regions[q] for q in ("eps", "half", "acc")}, "s1": ZERO, "s2": ZERO, "s3": ZERO},
        transitions=tuple(
            tr._replace(source="s1" if tr.source == "sink" else tr.source,
                        target=sinks[tr.source] if tr.target == "sink" else tr.target)
            for tr in t2.transitions) + tuple(loops))
    assert len(bloated.states) == 6 and validate(bloated) == []
    assert equivalent(bloated, t2).equivalent
    teacher = SimulatedTeacher(target)
    assert isomorphic(postprocess_to_canonical(bloated, teacher), fixture("a_t2"))
    assert teacher.membership_queries == 0 and teacher.equivalence_queries > 0


def test_learn_dispatch(target):
    result, _ = learn(SimulatedTeacher(target), ["a"])
    assert isomorphic(result, fixture("a_t2"))
    with pytest.raises(ValueError):
        learn(SimulatedTeacher(target), ["a"], mode="clever")


# -- properties -----------------------------------------------------------------

@settings(max_examples=200)
@given(automata(max_states=3, max_k=1, alphabet=("a",)))
def test_smart_learns_random_targets(a):
    result, stats = learn_smart(SimulatedTeacher(a), ["a"])
    assert is_strict(result)
    assert validate(result) == []
    assert equivalent(result, a).equivalent
    canon = canonicalize(a)
    assert len(result.states) == len(canon.states)
    assert stats.tables_processed <= canon.k + len(canon.states)


@settings(max_examples=200)
@given(automata(max_states=3, max_k=1, alphabet=("a",)))
def test_conjectures_reach_their_rows(a):
    """Every S word leads the conjecture to its own row with clock r(s)."""
    teacher = SimulatedTeacher(a)
    seen = []
    learn_smart(teacher, ["a"], observe=lambda kind, t: seen.append(t.copy()) if kind == "conjecture" else None)
    for t in seen:
        hyp = conjecture(t)
        names = {t.row(s): s for s in reversed(t.S)}
        for s in t.S:
            (q, v) = run(hyp, s).final
            assert q == format_word(names[t.row(s)])
            assert v == t.r(s)
