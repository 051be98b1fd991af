"""Teachers answering membership, equivalence and (optionally) reset queries."""
from __future__ import annotations

import threading
from fractions import Fraction
from typing import Callable, Dict, Iterable, Optional

from .core import Automaton, Word, accepts, complete_with_sink, validate
from .equiv import EQUIVALENT, Verdict, equivalent
from .reset import canonical_reset_automaton, reset_trace


class Teacher:
    """Query interface used by the learners. Counters count every logical query."""

    supports_reset = False

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.membership_queries = 0
        self.equivalence_queries = 0
        self.reset_queries = 0

    def _count(self, name: str) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + 1)

    def member(self, w: Word) -> bool:
        self._count("membership_queries")
        return self._member(w)

    def equivalence(self, candidate: Automaton) -> Verdict:
        self._count("equivalence_queries")
        return self._equivalence(candidate)

    def reset(self, u: Word) -> Fraction:
        if not self.supports_reset:
            raise NotImplementedError("this teacher does not answer reset queries")
        self._count("reset_queries")
        return self._reset(u)

    def _member(self, w: Word) -> bool:
        raise NotImplementedError

    def _equivalence(self, candidate: Automaton) -> Verdict:
        raise NotImplementedError

    def _reset(self, u: Word) -> Fraction:
        raise NotImplementedError


class SimulatedTeacher(Teacher):
    """Teacher backed by a hidden target automaton."""

    supports_reset = True

    def __init__(self, target: Automaton, cache: bool = True) -> None:
        super().__init__()
        bad = [d for d in validate(target) if not d.startswith("incomplete")]
        if bad:
            raise ValueError(f"invalid target: {bad[0]}")
        self.target = complete_with_sink(target)
        self._reset_automaton = canonical_reset_automaton(self.target)
        self._cache: Optional[Dict[Word, bool]] = {} if cache else None

    def _member(self, w: Word) -> bool:
        if self._cache is None:
            return accepts(self.target, w)
        hit = self._cache.get(w)
        if hit is None:
            hit = self._cache[w] = accepts(self.target, w)
        return hit

    def _equivalence(self, candidate: Automaton) -> Verdict:
        return equivalent(candidate, self.target)

    def _reset(self, u: Word) -> Fraction:
        return reset_trace(self._reset_automaton, u)[-1]


def simulated_teacher(target: Automaton, cache: bool = True) -> SimulatedTeacher:
    return SimulatedTeacher(target, cache)


class ScriptedTeacher(Teacher):
    """Teacher driven by plain functions, for languages given without an automaton.

    counterexample(candidate) returns a word on which candidate is wrong, or None.
    """

    def __init__(self, member: Callable[[Word], bool],
                 counterexample: Callable[[Automaton], Optional[Word]],
                 reset: Optional[Callable[[Word], Fraction]] = None) -> None:
        super().__init__()
        self._member_fn = member
        self._cex_fn = counterexample
        self._reset_fn = reset
        self.supports_reset = reset is not None

    def _member(self, w: Word) -> bool:
        return bool(self._member_fn(w))

    def _equivalence(self, candidate: Automaton) -> Verdict:
        w = self._cex_fn(candidate)
        if w is None:
            return EQUIVALENT
        return Verdict(w, 0 if accepts(candidate, w) else 1)

    def _reset(self, u: Word) -> Fraction:
        return Fraction(self._reset_fn(u))


def queued_counterexamples(words: Iterable[Word], fallback: Optional[Teacher] = None):
    """Counterexample function replaying fixed words, then deferring to a fallback teacher."""
    pending = list(words)

    def next_cex(candidate: Automaton) -> Optional[Word]:
        if pending:
            return pending.pop(0)
        if fallback is None:
            return None
        return fallback.equivalence(candidate).word
    return next_cex
