"""Reset functions, half-integral normal forms and the syntactic reset oracle."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Dict, FrozenSet, Tuple

from .core import HALF, Automaton, Word, dump_automaton, run

ResetTrace = Tuple[Fraction, ...]


def hi(x: Fraction) -> Fraction:
    """The half-integral value in the same region as x."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("hi is defined on nonnegative values")
    n = math.floor(x)
    return x if x == n else n + HALF


def is_half_integral(w: Word) -> bool:
    return all((2 * t).denominator == 1 for t, _ in w)


def reset_trace(a: Automaton, u: Word) -> ResetTrace:
    """Clock value after each prefix of u, starting with 0 for ε."""
    steps = run(a, u)
    values = [clock for (_, clock), _, _ in steps.steps]
    values.append(steps.final[1])
    return tuple(values)


def check_trace(trace: ResetTrace, u: Word) -> None:
    if len(trace) != len(u) + 1:
        raise ValueError(f"trace has {len(trace)} values for a word of length {len(u)}")
    if trace[0] != 0:
        raise ValueError("a reset trace starts at 0")
    for prev, nxt, (t, _) in zip(trace, trace[1:], u):
        if nxt not in (0, prev + t):
            raise ValueError(f"value {nxt} is neither 0 nor {prev + t}")


def normal_form(trace: ResetTrace, u: Word) -> Word:
    """Half-integral word taking the same transitions as u under the given resets.

    Each delay t becomes hi(r + t) - hi(r), where r is the clock before the letter:
    the least nonnegative half-integral delay landing in the region of r + t.
    """
    check_trace(trace, u)
    return tuple((hi(r + t) - hi(r), a) for r, (t, a) in zip(trace, u))


def trace_from_decisions(u: Word, keeps) -> ResetTrace:
    values = [Fraction(0)]
    for (t, _), keep in zip(u, keeps):
        values.append((values[-1] + t) if keep else Fraction(0))
    return tuple(values)


def enumerate_normal_forms(u: Word) -> FrozenSet[Word]:
    """Normal forms of u under every way of resetting or keeping the clock."""
    forms = set()
    for keeps in itertools.product((0, 1), repeat=max(len(u) - 1, 0)):
        forms.add(normal_form(trace_from_decisions(u, keeps + (0,)), u))
    return frozenset(forms)


_canonical_reset: Dict[str, Automaton] = {}


def canonical_reset_automaton(a: Automaton) -> Automaton:
    """An acceptor for L(a) whose reset function is the syntactic one (cached by content)."""
    key = dump_automaton(a)
    found = _canonical_reset.get(key)
    if found is None:
        from .transform import reset_canonical_acceptor
        found = reset_canonical_acceptor(a)
        _canonical_reset[key] = found
    return found


def syntactic_reset(a: Automaton, u: Word) -> Fraction:
    """Clock value the syntactic reset function of L(a) assigns to u."""
    return reset_trace(canonical_reset_automaton(a), u)[-1]


def syntactic_trace(a: Automaton, u: Word) -> ResetTrace:
    return reset_trace(canonical_reset_automaton(a), u)
