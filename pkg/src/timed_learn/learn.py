"""
Observation-table learning of one-clock timed languages.

learn_smart asks the teacher for reset values. learn_normal guesses them,
exploring every reset assignment in a pool of tables advanced in lock step.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from .core import (
    HALF, Automaton, Transition, Word, format_word, region_of, sigma_k,
)
from .reset import enumerate_normal_forms, normal_form
from .teacher import Teacher
from .transform import eliminate_bad_states, merge_equivalent_states, reduce_constant

Cell = Tuple[int, Fraction]
Observer = Callable[[str, "ObservationTable"], None]
# Narrows the reset values tried for a word; used to follow chosen branches.
Chooser = Callable[[Word, List[Fraction]], List[Fraction]]


class CapExceeded(RuntimeError):
    """A learning cap was hit; the target may not be recognizable."""


@dataclass
class Caps:
    max_k: int = 16
    max_tables: int = 10 ** 6
    max_pool: int = 10 ** 5


@dataclass
class LearnerStats:
    membership_queries: int = 0
    equivalence_queries: int = 0
    tables_processed: int = 0
    pool_peak: int = 0


@dataclass
class ObservationTable:
    k: int
    alphabet: Tuple[str, ...]
    S: Tuple[Word, ...] = ((),)
    E: Tuple[Word, ...] = ((),)
    cells: Dict[Word, Cell] = field(default_factory=dict)
    # Normal mode only: the guessed clock value of every prefix of every cell word.
    resets: Optional[Dict[Word, Fraction]] = None

    def sigma(self) -> List[Tuple[Fraction, str]]:
        return sigma_k(self.alphabet, self.k)

    def extensions(self) -> List[Word]:
        """SΣ_K minus S, in order."""
        in_s = set(self.S)
        out = []
        for s in self.S:
            for p in self.sigma():
                w = s + (p,)
                if w not in in_s:
                    in_s.add(w)
                    out.append(w)
        return out

    def row_words(self) -> List[Word]:
        return list(self.S) + self.extensions()

    def needed(self) -> List[Word]:
        seen = {}
        for u in self.row_words():
            for e in self.E:
                seen.setdefault(u + e, None)
        return list(seen)

    def missing(self) -> List[Word]:
        return [w for w in self.needed() if w not in self.cells]

    def row(self, u: Word) -> Tuple[Cell, ...]:
        return tuple(self.cells[u + e] for e in self.E)

    def r(self, u: Word) -> Fraction:
        return self.cells[u][1]

    def copy(self, **changes) -> "ObservationTable":
        fresh = dict(cells=dict(self.cells),
                     resets=dict(self.resets) if self.resets is not None else None)
        fresh.update(changes)
        return replace(self, **fresh)

    def describe(self) -> str:
        head = f"K={self.k}  E=[{', '.join(format_word(e) for e in self.E)}]"
        lines = [head]
        for u in self.row_words():
            mark = "S" if u in set(self.S) else " "
            cells = " | ".join(f"({b},{r})" for b, r in self.row(u))
            lines.append(f"{mark} {format_word(u)}: {cells}")
        return "\n".join(lines)


def initial_table(alphabet) -> ObservationTable:
    return ObservationTable(k=0, alphabet=tuple(sorted(alphabet)))


# ------------------------------------------------------------------
# Table predicates
# ------------------------------------------------------------------

def is_valid(t: ObservationTable) -> bool:
    return all(_ok_value(r, t.k) for _, r in t.cells.values())


def _ok_value(r: Fraction, k: int) -> bool:
    return 0 <= r <= k and not (r > 0 and r.denominator == 1)


def is_closed(t: ObservationTable) -> Tuple[bool, Optional[Word]]:
    rows = {t.row(s) for s in t.S}
    for w in t.extensions():
        if t.row(w) not in rows:
            return False, w
    return True, None


def is_consistent(t: ObservationTable):
    """Return (True, None, None) or (False, kind, witness).

    Kind "a" carries (s1, s2, (t, a), e); kind "b" carries the word s(t·a).
    """
    rows = {s: t.row(s) for s in t.S}
    sig = t.sigma()
    for i, s1 in enumerate(t.S):
        for s2 in t.S[i + 1:]:
            if rows[s1] != rows[s2]:
                continue
            for p in sig:
                for e in t.E:
                    if t.cells[s1 + (p,) + e] != t.cells[s2 + (p,) + e]:
                        return False, "a", (s1, s2, p, e)
    for w in t.row_words():
        if not w:
            continue
        s, (delay, letter) = w[:-1], w[-1]
        if t.r(s) + delay > t.k and t.row(w) != t.row(s + ((t.k + HALF, letter),)):
            return False, "b", w
    return True, None, None


def next_action(t: ObservationTable):
    """The action to apply, or None when the table is closed, consistent and valid.

    Validity is checked first, then closedness, consistency (a) and (b).
    """
    if not is_valid(t):
        return ("valid", None)
    closed, w = is_closed(t)
    if not closed:
        return ("close", w)
    ok, kind, witness = is_consistent(t)
    if not ok:
        return ("column", witness) if kind == "a" else ("consistent-b", witness)
    return None


def apply_action(t: ObservationTable, action) -> ObservationTable:
    """Change S, E or K; the new cells are left unfilled."""
    kind, payload = action
    if kind == "close":
        return t.copy(S=t.S + (payload,))
    if kind == "column":
        _, _, p, e = payload
        return t.copy(E=t.E + ((p,) + e,))
    return t.copy(k=t.k + 1)


def add_rows(t: ObservationTable, words) -> ObservationTable:
    """Add words and all their prefixes to S."""
    S = list(t.S)
    known = set(S)
    for w in words:
        for i in range(1, len(w) + 1):
            if w[:i] not in known:
                known.add(w[:i])
                S.append(w[:i])
    return t.copy(S=tuple(S))


def conjecture(t: ObservationTable) -> Automaton:
    """The strict K-acceptor induced by a closed, consistent and valid table."""
    if next_action(t) is not None:
        raise ValueError("conjecture needs a closed, consistent and valid table")
    name: Dict[tuple, str] = {}
    rep: Dict[tuple, Word] = {}
    for s in t.S:
        row = t.row(s)
        if row not in name:
            name[row] = format_word(s)
            rep[row] = s
    transitions = {}
    regions = {}
    for row, s in rep.items():
        q = name[row]
        regions[q] = region_of(t.r(s), t.k)
        for delay, letter in t.sigma():
            w = s + ((delay, letter),)
            guard = region_of(t.r(s) + delay, t.k)
            target = t.row(w)
            keep = 0 if t.r(w) == 0 else 1
            transitions.setdefault((q, letter, guard), Transition(q, name[target], letter, guard, keep))
    accepting = {name[row] for row in rep if row[0][0] == 1}
    return Automaton.build(t.alphabet, [name[row] for row in rep], name[t.row(())],
                           accepting, transitions.values(), t.k, regions)


# ------------------------------------------------------------------
# Smart teacher
# ------------------------------------------------------------------

def fill_table(t: ObservationTable, teacher: Teacher, stats: Optional[LearnerStats] = None) -> ObservationTable:
    """Query membership and reset for every missing cell (in place)."""
    stats = stats if stats is not None else LearnerStats()
    for w in t.missing():
        stats.membership_queries += 1
        t.cells[w] = (int(teacher.member(w)), Fraction(teacher.reset(w)))
    return t


def process_step(t: ObservationTable, teacher: Teacher, stats: Optional[LearnerStats] = None) -> ObservationTable:
    """Apply exactly one action to a table that is not closed, consistent and valid."""
    stats = stats if stats is not None else LearnerStats()
    action = next_action(t)
    if action is None:
        raise ValueError("table is already closed, consistent and valid")
    return fill_table(apply_action(t, action), teacher, stats)


def refine_smart(t: ObservationTable, w: Word, teacher: Teacher,
                 stats: Optional[LearnerStats] = None) -> ObservationTable:
    """Add the syntactic normal form of the counterexample and its prefixes to S."""
    stats = stats if stats is not None else LearnerStats()
    trace = tuple(Fraction(teacher.reset(w[:i])) for i in range(len(w) + 1))
    return fill_table(add_rows(t, [normal_form(trace, w)]), teacher, stats)


def learn_smart(teacher: Teacher, alphabet, caps: Optional[Caps] = None,
                observe: Optional[Observer] = None) -> Tuple[Automaton, LearnerStats]:
    """Learn the canonical acceptor with a teacher that also answers reset queries."""
    caps = caps or Caps()
    stats = LearnerStats(pool_peak=1)
    t = fill_table(initial_table(alphabet), teacher, stats)
    _tell(observe, "initial", t)
    progress = None
    while True:
        action = next_action(t)
        if action is not None:
            stats.tables_processed += 1
            if stats.tables_processed > caps.max_tables:
                raise CapExceeded(f"more than {caps.max_tables} tables processed")
            t = fill_table(apply_action(t, action), teacher, stats)
            if t.k > caps.max_k:
                raise CapExceeded(f"constant exceeded the cap {caps.max_k}")
            _tell(observe, action[0], t)
            continue
        hyp = conjecture(t)
        now = (len({t.row(s) for s in t.S}), t.k)
        assert progress is None or now > progress, "no progress between conjectures"
        progress = now
        _tell(observe, "conjecture", t)
        stats.equivalence_queries += 1
        verdict = teacher.equivalence(hyp)
        if verdict.equivalent:
            return hyp, stats
        t = refine_smart(t, verdict.word, teacher, stats)
        _tell(observe, "counterexample", t)


def _tell(observe, event, t):
    if observe is not None:
        observe(event, t)


# ------------------------------------------------------------------
# Normal teacher
# ------------------------------------------------------------------

def _prefix_closure(words) -> List[Word]:
    out = set()
    for w in words:
        for i in range(1, len(w) + 1):
            out.add(w[:i])
    return sorted(out, key=lambda w: (len(w), w))


def reset_options(word: Word, prev: Fraction, max_value: Optional[int] = None) -> List[Fraction]:
    """Values a guessed reset function may give word, when its prefix got prev.

    0 or prev+t, except that positive integers and values above max_value are never used.
    """
    kept = prev + word[-1][0]
    options = [Fraction(0)]
    if kept != 0 and kept.denominator != 1 and (max_value is None or kept <= max_value):
        options.append(kept)
    return options


def new_reset_words(t: ObservationTable) -> List[Word]:
    known = t.resets if t.resets is not None else {(): Fraction(0)}
    return [w for w in _prefix_closure(t.needed()) if w not in known]


def reset_assignments(t: ObservationTable, max_value: Optional[int] = None,
                      choose: Optional[Chooser] = None) -> Iterator[Dict[Word, Fraction]]:
    """Every way to extend the guessed resets to the words the table now needs.

    Options per word come from reset_options, optionally narrowed by choose.
    Assignments come reset-first.
    """
    known = t.resets if t.resets is not None else {(): Fraction(0)}
    new = new_reset_words(t)

    def extend(i: int, chosen: Dict[Word, Fraction]):
        if i == len(new):
            yield dict(chosen)
            return
        w = new[i]
        prev = chosen[w[:-1]] if w[:-1] in chosen else known[w[:-1]]
        options = reset_options(w, prev, max_value)
        if choose is not None:
            options = [v for v in choose(w, options) if v in options]
        for value in options:
            chosen[w] = value
            yield from extend(i + 1, chosen)
        del chosen[w]

    yield from extend(0, {})


def _children(t: ObservationTable, teacher: Teacher, stats: LearnerStats,
              caps: Caps, choose: Optional[Chooser] = None) -> Iterator[ObservationTable]:
    bits = {}
    for w in t.missing():
        stats.membership_queries += 1
        bits[w] = int(teacher.member(w))
    base = dict(t.resets) if t.resets is not None else {(): Fraction(0)}
    for extra in reset_assignments(t, caps.max_k, choose):
        resets = dict(base)
        resets.update(extra)
        cells = dict(t.cells)
        for w, b in bits.items():
            cells[w] = (b, resets[w])
        yield replace(t, cells=cells, resets=resets)


def normal_step(t: ObservationTable, teacher: Teacher, stats: LearnerStats):
    """One step of a pool table: an action, or a conjecture and its counterexample.

    Returns ("accepted", automaton), ("stuck", None) when a counterexample adds
    nothing new, or ("grown", table) with S, E or K extended and cells unfilled.
    """
    action = next_action(t)
    if action is not None:
        return "grown", apply_action(t, action)
    hyp = conjecture(t)
    stats.equivalence_queries += 1
    verdict = teacher.equivalence(hyp)
    if verdict.equivalent:
        return "accepted", hyp
    forms = sorted(enumerate_normal_forms(verdict.word))
    grown = add_rows(t, forms)
    if grown.S == t.S:
        return "stuck", None
    return "grown", grown


def learn_normal(teacher: Teacher, alphabet, caps: Optional[Caps] = None,
                 choose: Optional[Chooser] = None,
                 observe: Optional[Observer] = None) -> Tuple[Automaton, LearnerStats]:
    """Learn a strict acceptor from membership and equivalence queries only.

    choose, when given, narrows the reset guesses (used to follow chosen branches).
    """
    caps = caps or Caps()
    stats = LearnerStats()
    pool = []
    for child in _children(initial_table(alphabet), teacher, stats, caps, choose):
        _tell(observe, "initial", child)
        _push(pool, child, caps, stats)
    while pool:
        next_pool = []
        for t in pool:
            stats.tables_processed += 1
            if stats.tables_processed > caps.max_tables:
                raise CapExceeded(f"more than {caps.max_tables} tables processed")
            status, out = normal_step(t, teacher, stats)
            if status == "accepted":
                _tell(observe, "accepted", t)
                return out, stats
            if status == "stuck" or out.k > caps.max_k:
                continue
            for child in _children(out, teacher, stats, caps, choose):
                _tell(observe, "step", child)
                _push(next_pool, child, caps, stats)
        pool = next_pool
    raise CapExceeded("every branch of the pool died out")


def _push(pool, t, caps, stats):
    pool.append(t)
    if len(pool) > caps.max_pool:
        raise CapExceeded(f"pool grew beyond {caps.max_pool} tables")
    stats.pool_peak = max(stats.pool_peak, len(pool))


# ------------------------------------------------------------------
# Post-processing
# ------------------------------------------------------------------

def postprocess_to_canonical(a: Automaton, teacher: Teacher) -> Automaton:
    """Canonical acceptor from a correct strict acceptor, using equivalence queries only."""
    check = teacher.equivalence
    a = eliminate_bad_states(a, check)
    a = merge_equivalent_states(a, check)
    return reduce_constant(a)


def learn(teacher: Teacher, alphabet, mode: str = "smart", caps: Optional[Caps] = None,
          canonical: bool = False) -> Tuple[Automaton, LearnerStats]:
    if mode == "smart":
        return learn_smart(teacher, alphabet, caps)
    if mode != "normal":
        raise ValueError(f"unknown mode {mode!r}")
    result, stats = learn_normal(teacher, alphabet, caps)
    if canonical:
        result = postprocess_to_canonical(result, teacher)
        stats.equivalence_queries = teacher.equivalence_queries
    return result, stats
