"""
Language equivalence for one-clock deterministic timed automata.

The two automata run side by side, so the search tracks two clocks. A product
node abstracts the clock pair by the region of each clock (w.r.t. the larger
constant) and, when both clocks sit strictly between integers, by the order of
their fractional parts. Missing transitions lead to an implicit rejecting sink.
"""
from __future__ import annotations

import functools
import itertools
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .core import (
    ABOVE, Automaton, Open, Point, Transition, Word, format_word, fresh_names,
    is_deterministic, region_of, validate,
)

SINK = None  # product component that fell off its automaton


@dataclass(frozen=True)
class Verdict:
    """Outcome of an equivalence check; word is None when the languages agree."""
    word: Optional[Word] = None
    accepted_by: Optional[int] = None  # 0: first automaton, 1: second

    @property
    def equivalent(self) -> bool:
        return self.word is None

    def __str__(self) -> str:
        if self.equivalent:
            return "equivalent"
        return f"counterexample {format_word(self.word)} (accepted by automaton {self.accepted_by + 1})"


EQUIVALENT = Verdict()


def complement(a: Automaton) -> Automaton:
    """Swap accepting and rejecting states of a complete automaton."""
    problems = [d for d in validate(a) if d.startswith("incomplete")]
    if problems:
        raise ValueError(f"complement needs a complete automaton: {problems[0]}")
    return a.replace(accepting=frozenset(a.states) - a.accepting)


def _frac(v: Fraction) -> Fraction:
    return v - math.floor(v)


@functools.lru_cache(maxsize=1 << 16)
def _clock_key(v1, v2, k, live1, live2):
    r1 = region_of(v1, k) if live1 else None
    r2 = region_of(v2, k) if live2 else None
    order = 0
    if r1 is not None and r2 is not None and r1.is_open() and r2.is_open():
        f1, f2 = _frac(v1), _frac(v2)
        order = (f1 > f2) - (f1 < f2)
    return (r1, r2, order)


# The search runs on clock values scaled by 12: representatives sit at
# multiples of 1/6 and the delays between them at multiples of 1/12.
SCALE = 12


def _region12(v: int, k: int):
    if v > SCALE * k:
        return ABOVE
    n, r = divmod(v, SCALE)
    return Point(n) if r == 0 else Open(n)


def _key12(v1, v2, k, live1, live2):
    r1 = _region12(v1, k) if live1 else None
    r2 = _region12(v2, k) if live2 else None
    order = 0
    if r1 is not None and r2 is not None and r1.is_open() and r2.is_open():
        f1, f2 = v1 % SCALE, v2 % SCALE
        order = (f1 > f2) - (f1 < f2)
    return (r1, r2, order)


_FRACS = {-1: (4, 8), 0: (6, 6), 1: (8, 4)}


def _representative(key, k) -> Tuple[int, int]:
    r1, r2, order = key

    def value(r, f):
        if r is None:
            return 0
        if r.is_point():
            return SCALE * r.n
        if r.is_open():
            return SCALE * r.n + f
        return SCALE * (k + 1)
    f1, f2 = _FRACS[order]
    return value(r1, f1), value(r2, f2)


@functools.lru_cache(maxsize=1 << 12)
def _delay_samples(v1: int, v2: int, k: int) -> Tuple[int, ...]:
    """Delays hitting every clock-pair region reachable from (v1, v2) by waiting."""
    marks = {0}
    for v in (v1, v2):
        if v <= SCALE * k:
            for n in range(v // SCALE + 1, k + 2):
                marks.add(SCALE * n - v)
    marks = sorted(marks)
    samples = list(marks)
    samples += [(x + y) // 2 for x, y in zip(marks, marks[1:])]
    samples.append(marks[-1] + SCALE)
    return tuple(sorted(samples))


def _fire12(a: Automaton, q, letter, v: int):
    if q is SINK:
        return SINK, 0
    tr = a.table.get((q, letter, _region12(v, a.k)))
    if tr is None:
        return SINK, 0
    return tr.target, v * tr.reset


def _fire(a: Automaton, q, letter, v) -> Tuple[Optional[str], Fraction, Optional[Transition]]:
    if q is SINK:
        return SINK, Fraction(0), None
    tr = a.step(q, letter, v)
    if tr is None:
        return SINK, Fraction(0), None
    return tr.target, v * tr.reset, tr


def _accepting(a: Automaton, q) -> bool:
    return q is not SINK and q in a.accepting


def equivalent(a: Automaton, b: Automaton) -> Verdict:
    """Decide L(a) = L(b); otherwise return a word accepted by exactly one of them."""
    for name, x in (("first", a), ("second", b)):
        if not is_deterministic(x):
            bad = [d for d in validate(x) if d.startswith("nondeterminism")]
            raise ValueError(f"{name} automaton is not deterministic: {bad[0]}")
    k = max(a.k, b.k)
    alphabet = sorted(set(a.alphabet) | set(b.alphabet))
    regions = _region_table(k)
    top = len(regions)

    def region(v):
        return regions[v] if v < top else ABOVE

    def key(v1, v2, live1, live2):
        r1 = region(v1) if live1 else None
        r2 = region(v2) if live2 else None
        order = 0
        if r1 is not None and r2 is not None and r1.kind == "open" and r2.kind == "open":
            f1, f2 = v1 % SCALE, v2 % SCALE
            order = (f1 > f2) - (f1 < f2)
        return (r1, r2, order)

    def firing(x):
        table, own = x.table, _region_table(x.k)
        limit = len(own)

        def fire(q, letter, v):
            if q is SINK:
                return SINK, 0
            tr = table.get((q, letter, own[v] if v < limit else ABOVE))
            if tr is None:
                return SINK, 0
            return tr.target, v * tr.reset
        return fire

    fire1, fire2 = firing(a), firing(b)

    start = (a.initial, b.initial, key(0, 0, True, True))
    parent = {start: None}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        q1, q2, node_key = node
        if _accepting(a, q1) != _accepting(b, q2):
            return _concretize(a, b, parent, node, k)
        v1, v2 = _representative(node_key, k)
        live1, live2 = q1 is not SINK, q2 is not SINK
        for d in _delay_samples(v1, v2, k):
            w1, w2 = v1 + d, v2 + d
            mid = None
            for letter in alphabet:
                p1, u1 = fire1(q1, letter, w1)
                p2, u2 = fire2(q2, letter, w2)
                nxt = (p1, p2, key(u1, u2, p1 is not SINK, p2 is not SINK))
                if nxt not in parent:
                    if mid is None:
                        mid = key(w1, w2, live1, live2)
                    parent[nxt] = (node, mid, letter)
                    queue.append(nxt)
    return EQUIVALENT


@functools.lru_cache(maxsize=None)
def _region_table(k: int) -> Tuple:
    """Region of every scaled clock value up to SCALE*(k+3); larger values are above K."""
    return tuple(_region12(v, k) for v in range(SCALE * (k + 3)))


def _concretize(a, b, parent, node, k) -> Verdict:
    """Turn an abstract path into a concrete word with exact rational delays."""
    path = []
    while parent[node] is not None:
        prev, mid, letter = parent[node]
        path.append((prev, mid, letter))
        node = prev
    path.reverse()
    denom = 4 * max(len(path), 1)
    q1, q2 = a.initial, b.initial
    v1 = v2 = Fraction(0)
    word = []
    for (_, _, key), mid, letter in path:
        assert _clock_key(v1, v2, k, q1 is not SINK, q2 is not SINK) == key
        d = _smallest_delay(v1, v2, k, mid, q1 is not SINK, q2 is not SINK, denom)
        word.append((d, letter))
        q1, v1, _ = _fire(a, q1, letter, v1 + d)
        q2, v2, _ = _fire(b, q2, letter, v2 + d)
    word = tuple(word)
    acc1 = _accepting(a, q1)
    assert acc1 != _accepting(b, q2)
    return Verdict(word, 0 if acc1 else 1)


def _smallest_delay(v1, v2, k, target, live1, live2, denom) -> Fraction:
    """Least delay on the 1/denom grid (refined if needed) reaching the target clock regions."""
    while True:
        limit = (k + 2) * denom
        for j in range(limit + 1):
            d = Fraction(j, denom)
            if _clock_key(v1 + d, v2 + d, k, live1, live2) == target:
                return d
        denom *= 2


def state_lang_equal(acc: Automaton, q: str, q2: str) -> bool:
    """Whether q and q2 accept the same words from the half-integral clock value of their region."""
    r = acc.region(q)
    if acc.regions is None:
        raise ValueError("state_lang_equal needs an acceptor")
    if r != acc.region(q2):
        raise ValueError(f"states {q!r} and {q2!r} have different regions")
    if q == q2:
        return True
    return equivalent(_rooted(acc, q), _rooted(acc, q2)).equivalent


def _rooted(acc: Automaton, q: str) -> Automaton:
    """Acceptor with a fresh initial state that enters q with a clock inside region(q)."""
    root = fresh_names(acc.states, 1)[0]
    entry = Transition(root, q, acc.alphabet[0], acc.region(q), 1)
    return Automaton.build(acc.alphabet, (root,) + acc.states, root, acc.accepting,
                           acc.transitions + (entry,), acc.k)


def accepts_config(a: Automaton, q, v: Fraction, w: Word) -> bool:
    for t, letter in w:
        q, v, _ = _fire(a, q, letter, v + t)
    return _accepting(a, q)


def bounded_oracle_equal(a: Automaton, b: Automaton, max_len: int,
                         denom_bound: int) -> Tuple[bool, Optional[Word]]:
    """Compare membership on every word up to max_len with delays p/denom_bound <= K+1.

    Words reaching the same pair of configurations have the same future, so
    only the first of them is extended.
    """
    k = max(a.k, b.k)
    delays = [Fraction(p, denom_bound) for p in range(denom_bound * (k + 1) + 1)]
    letters = sorted(set(a.alphabet) | set(b.alphabet))
    level = [((), a.initial, Fraction(0), b.initial, Fraction(0))]
    for length in range(max_len + 1):
        for w, q1, v1, q2, v2 in level:
            if _accepting(a, q1) != _accepting(b, q2):
                return False, w
        if length == max_len:
            break
        nxt = {}
        for (w, q1, v1, q2, v2), d, letter in itertools.product(level, delays, letters):
            p1, u1, _ = _fire(a, q1, letter, v1 + d)
            p2, u2, _ = _fire(b, q2, letter, v2 + d)
            nxt.setdefault((p1, u1, p2, u2), w + ((d, letter),))
        level = [(w, p1, u1, p2, u2) for (p1, u1, p2, u2), w in nxt.items()]
    return True, None
