"""
One-clock deterministic timed automata: regions, words, automata, runs.

All clock arithmetic uses fractions.Fraction. Floats never appear.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

HALF = Fraction(1, 2)
GEN_PREFIX = "__gen"

Word = Tuple[Tuple[Fraction, str], ...]
EMPTY: Word = ()


class ParseError(ValueError):
    """Raised for malformed guards, words or automaton files."""


# ------------------------------------------------------------------
# Regions
# ------------------------------------------------------------------

class Region(NamedTuple):
    """A K-region: ("point", n), ("open", n) meaning (n, n+1), or ("above", 0)."""
    kind: str
    n: int = 0

    def is_point(self) -> bool:
        return self.kind == "point"

    def is_open(self) -> bool:
        return self.kind == "open"

    def is_above(self) -> bool:
        return self.kind == "above"


@lru_cache(maxsize=None)
def Point(n: int) -> Region:
    return Region("point", n)


@lru_cache(maxsize=None)
def Open(n: int) -> Region:
    return Region("open", n)


ABOVE = Region("above", 0)
ZERO = Point(0)


def region_index(r: Region, k: int) -> int:
    """Position of r in the increasing order of K-regions."""
    if r.kind == "point":
        return 2 * r.n
    if r.kind == "open":
        return 2 * r.n + 1
    return 2 * k + 1


def region_of(v: Fraction, k: int) -> Region:
    num, den = v.numerator, v.denominator
    if num > k * den:
        return ABOVE
    return Point(num // den) if den == 1 else Open(num // den)


def all_regions(k: int) -> List[Region]:
    out = []
    for n in range(k + 1):
        out.append(Point(n))
        if n < k:
            out.append(Open(n))
    out.append(ABOVE)
    return out


def regions_from(r: Region, k: int) -> List[Region]:
    """Regions reachable from a clock in r by letting time pass."""
    i = region_index(r, k)
    return [g for g in all_regions(k) if region_index(g, k) >= i]


def is_k_region(r: Region, k: int) -> bool:
    if r.kind == "point":
        return 0 <= r.n <= k
    if r.kind == "open":
        return 0 <= r.n < k
    return r.kind == "above"


def region_sample(r: Region, k: int) -> Fraction:
    """The half-integral value lying in r."""
    if r.kind == "point":
        return Fraction(r.n)
    if r.kind == "open":
        return r.n + HALF
    return k + HALF


def format_guard(r: Region, k: int) -> str:
    if r.kind == "point":
        return f"x={r.n}"
    if r.kind == "open":
        return f"{r.n}<x<{r.n + 1}"
    return f"x>{k}"


_CMP = r"(<=|<|>=|>|=|!=|≤|≥|≠)"


def _atom(text: str):
    """Turn one guard atom into a predicate on clock values plus its constants."""
    t = text.replace(" ", "")
    if t in ("true", "0<=x", "x>=0", "0≤x", "x≥0"):
        return (lambda v: True), []
    m = re.fullmatch(r"x(?:∉|notin)([\(\[])(\d+),(\d+)([\)\]])", t)
    if m:
        lo, hi = int(m.group(2)), int(m.group(3))
        lo_closed, hi_closed = m.group(1) == "[", m.group(4) == "]"

        def outside(v, lo=lo, hi=hi, lc=lo_closed, hc=hi_closed):
            inside = (lo <= v if lc else lo < v) and (v <= hi if hc else v < hi)
            return not inside
        return outside, [lo, hi]
    m = re.fullmatch(r"(\d+)(<=|<|≤)x(<=|<|≤)(\d+)", t)
    if m:
        lo, hi = int(m.group(1)), int(m.group(4))
        lc, hc = m.group(2) in ("<=", "≤"), m.group(3) in ("<=", "≤")
        return (lambda v: (lo <= v if lc else lo < v) and (v <= hi if hc else v < hi)), [lo, hi]
    m = re.fullmatch(r"x" + _CMP + r"(\d+)", t)
    if m:
        op, c = m.group(1), int(m.group(2))
        return _compare(op, c), [c]
    m = re.fullmatch(r"(\d+)" + _CMP + r"x", t)
    if m:
        flipped = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "≤": "≥", "≥": "≤"}
        op, c = m.group(2), int(m.group(1))
        return _compare(flipped.get(op, op), c), [c]
    raise ParseError(f"cannot parse guard {text!r}")


def _compare(op: str, c: int):
    return {
        "<": lambda v: v < c,
        "<=": lambda v: v <= c, "≤": lambda v: v <= c,
        ">": lambda v: v > c,
        ">=": lambda v: v >= c, "≥": lambda v: v >= c,
        "=": lambda v: v == c,
        "!=": lambda v: v != c, "≠": lambda v: v != c,
    }[op]


def parse_guard(text: str, k: int) -> List[Region]:
    """Expand a guard string into the K-regions it covers, in increasing order.

    Plain regions ("x=1", "0<x<1", "x>2") and macros ("0<=x", "x!=2",
    "x∉(0,1)", "1<x") are accepted. Every constant must be at most K so the
    guard is a union of regions.
    """
    pred, consts = _atom(text)
    for c in consts:
        if c > k:
            raise ParseError(f"guard {text!r} uses constant {c} above K={k}")
    covered = [r for r in all_regions(k) if pred(region_sample(r, k))]
    if not covered:
        raise ParseError(f"guard {text!r} is empty")
    return covered


# ------------------------------------------------------------------
# Timed words
# ------------------------------------------------------------------

def parse_delay(text: str) -> Fraction:
    try:
        v = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad delay {text!r}") from exc
    if v < 0:
        raise ParseError(f"negative delay {text!r}")
    return v


def parse_word(text: str) -> Word:
    """Parse "0.3:a 19/10:b" into a word. An empty string is ε."""
    pairs = []
    for token in text.split():
        if token in ("ε", "eps"):
            continue
        delay, sep, letter = token.rpartition(":")
        if not sep or not letter or not delay:
            raise ParseError(f"bad word token {token!r}")
        pairs.append((parse_delay(delay), letter))
    return tuple(pairs)


def format_delay(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def format_word(w: Word) -> str:
    if not w:
        return "ε"
    return " ".join(f"{format_delay(t)}:{a}" for t, a in w)


def make_word(*pairs) -> Word:
    """Build a word from (delay, letter) pairs; delays may be int, str or Fraction."""
    return tuple((Fraction(t), a) for t, a in pairs)


def sigma_k(alphabet: Iterable[str], k: int) -> List[Tuple[Fraction, str]]:
    """Half-integral delays 0, 1/2, ..., K+1/2 crossed with the alphabet."""
    delays = [Fraction(i, 2) for i in range(2 * k + 2)]
    return [(t, a) for t in delays for a in sorted(alphabet)]


# ------------------------------------------------------------------
# Automata
# ------------------------------------------------------------------

class Transition(NamedTuple):
    source: str
    target: str
    letter: str
    guard: Region
    reset: int  # 0 resets the clock, 1 keeps it


@dataclass(frozen=True)
class Automaton:
    alphabet: Tuple[str, ...]
    states: Tuple[str, ...]
    initial: str
    accepting: frozenset
    transitions: Tuple[Transition, ...]
    k: int
    regions: Optional[Dict[str, Region]] = field(default=None, compare=True)

    @staticmethod
    def build(alphabet, states, initial, accepting, transitions, k, regions=None) -> "Automaton":
        return Automaton(
            alphabet=tuple(sorted(set(alphabet))),
            states=tuple(dict.fromkeys(states)),
            initial=initial,
            accepting=frozenset(accepting),
            transitions=tuple(sorted(set(transitions), key=lambda t: _transition_key(t, k))),
            k=k,
            regions=dict(regions) if regions is not None else None,
        )

    def replace(self, **changes) -> "Automaton":
        fields = dict(alphabet=self.alphabet, states=self.states, initial=self.initial,
                      accepting=self.accepting, transitions=self.transitions, k=self.k,
                      regions=self.regions)
        fields.update(changes)
        return Automaton.build(**fields)

    @cached_property
    def table(self) -> Dict[Tuple[str, str, Region], Transition]:
        out = {}
        for t in self.transitions:
            out.setdefault((t.source, t.letter, t.guard), t)
        return out

    @cached_property
    def outgoing(self) -> Dict[str, List[Transition]]:
        out: Dict[str, List[Transition]] = {q: [] for q in self.states}
        for t in self.transitions:
            out.setdefault(t.source, []).append(t)
        return out

    def step(self, q: str, letter: str, clock: Fraction) -> Optional[Transition]:
        return self.table.get((q, letter, region_of(clock, self.k)))

    def region(self, q: str) -> Optional[Region]:
        return None if self.regions is None else self.regions.get(q)

    def is_acceptor(self) -> bool:
        return self.regions is not None


def _transition_key(t: Transition, k: int):
    return (t.source, t.letter, region_index(t.guard, k), t.target, t.reset)


class Run(NamedTuple):
    steps: List[Tuple[Tuple[str, Fraction], Transition, Fraction]]
    final: Tuple[str, Fraction]


class IncompleteError(ValueError):
    """The automaton has no transition for a configuration reached by a word."""


def guard_slots(a: Automaton, q: str) -> List[Region]:
    """Guards a complete automaton must offer from q (per letter)."""
    r = a.region(q)
    return regions_from(r, a.k) if r is not None else all_regions(a.k)


def validate(a: Automaton) -> List[str]:
    """Return diagnostics; an empty list means deterministic, complete and well formed."""
    diags = []
    states = set(a.states)
    if a.initial not in states:
        diags.append(f"initial state {a.initial!r} is not a state")
    for q in sorted(a.accepting - states):
        diags.append(f"accepting state {q!r} is not a state")
    seen: Dict[Tuple[str, str, Region], Transition] = {}
    for t in a.transitions:
        if t.source not in states or t.target not in states:
            diags.append(f"transition {_fmt_t(t, a.k)} uses an unknown state")
        if t.letter not in a.alphabet:
            diags.append(f"transition {_fmt_t(t, a.k)} uses letter {t.letter!r} outside the alphabet")
        if not is_k_region(t.guard, a.k):
            diags.append(f"transition {_fmt_t(t, a.k)} has a guard that is not a {a.k}-region")
        if t.reset not in (0, 1):
            diags.append(f"transition {_fmt_t(t, a.k)} has reset bit {t.reset!r}")
        key = (t.source, t.letter, t.guard)
        if key in seen:
            diags.append(f"nondeterminism: {_fmt_t(seen[key], a.k)} and {_fmt_t(t, a.k)}")
        else:
            seen[key] = t
    for q in a.states:
        for letter in a.alphabet:
            for g in guard_slots(a, q):
                if (q, letter, g) not in seen:
                    diags.append(f"incomplete: no transition from {q!r} on {letter!r} with {format_guard(g, a.k)}")
    if a.regions is not None:
        diags.extend(_acceptor_diagnostics(a))
    return diags


def _acceptor_diagnostics(a: Automaton) -> List[str]:
    diags = []
    for q in a.states:
        if q not in a.regions:
            diags.append(f"acceptor: state {q!r} has no region")
        elif not is_k_region(a.regions[q], a.k):
            diags.append(f"acceptor: region of {q!r} is not a {a.k}-region")
    if a.regions.get(a.initial) != ZERO:
        diags.append(f"acceptor: initial state {a.initial!r} must have region x=0")
    for t in a.transitions:
        want = a.regions.get(t.target)
        if t.reset == 0 and want != ZERO:
            diags.append(f"acceptor: {_fmt_t(t, a.k)} resets into a state whose region is not x=0")
        if t.reset == 1 and want != t.guard:
            diags.append(f"acceptor: {_fmt_t(t, a.k)} keeps the clock but its guard differs from the target region")
    return diags


def _fmt_t(t: Transition, k: int) -> str:
    return f"({t.source} -{t.letter}, {format_guard(t.guard, k)}, {t.reset}-> {t.target})"


def is_deterministic(a: Automaton) -> bool:
    return len(a.table) == len(a.transitions)


def complete_with_sink(a: Automaton) -> Automaton:
    """Fill every missing guard slot with a resetting edge into a fresh rejecting sink."""
    if not is_deterministic(a):
        raise ValueError("cannot complete a nondeterministic automaton")
    missing = [(q, letter, g) for q in a.states for letter in a.alphabet
               for g in guard_slots(a, q) if (q, letter, g) not in a.table]
    if not missing:
        return a
    sink = fresh_names(a.states, 1)[0]
    new = [Transition(q, sink, letter, g, 0) for q, letter, g in missing]
    new += [Transition(sink, sink, letter, g, 0) for letter in a.alphabet for g in all_regions(a.k)]
    regions = None
    if a.regions is not None:
        regions = dict(a.regions)
        regions[sink] = ZERO
    return a.replace(states=a.states + (sink,), transitions=a.transitions + tuple(new), regions=regions)


def run(a: Automaton, w: Word) -> Run:
    """The unique run of w from (initial, 0)."""
    q, v = a.initial, Fraction(0)
    steps = []
    for t, letter in w:
        tr = a.step(q, letter, v + t)
        if tr is None:
            raise IncompleteError(f"no transition from {q!r} on {letter!r} at clock {format_delay(v + t)}")
        steps.append(((q, v), tr, t))
        q, v = tr.target, (v + t) * tr.reset
    return Run(steps, (q, v))


def accepts(a: Automaton, w: Word) -> bool:
    """Membership; a missing transition rejects."""
    q, v = a.initial, Fraction(0)
    for t, letter in w:
        tr = a.step(q, letter, v + t)
        if tr is None:
            return False
        q, v = tr.target, (v + t) * tr.reset
    return q in a.accepting


# ------------------------------------------------------------------
# Structural helpers
# ------------------------------------------------------------------

def fresh_names(existing: Iterable[str], count: int) -> List[str]:
    """Generated state ids "__gen<n>" not clashing with existing ones."""
    used = set(existing)
    top = -1
    for s in used:
        if s.startswith(GEN_PREFIX) and s[len(GEN_PREFIX):].isdigit():
            top = max(top, int(s[len(GEN_PREFIX):]))
    return [f"{GEN_PREFIX}{top + 1 + i}" for i in range(count)]


def feasible(a: Automaton, t: Transition) -> bool:
    """Whether t can ever fire, given the region of its source (always true without regions)."""
    r = a.region(t.source)
    return r is None or region_index(t.guard, a.k) >= region_index(r, a.k)


def bfs_order(a: Automaton) -> List[str]:
    """States reachable from the initial state, breadth first, following feasible edges."""
    order = [a.initial]
    seen = {a.initial}
    i = 0
    while i < len(order):
        q = order[i]
        i += 1
        for t in a.outgoing.get(q, []):
            if t.target not in seen and feasible(a, t):
                seen.add(t.target)
                order.append(t.target)
    return order


def prune(a: Automaton) -> Automaton:
    """Drop unreachable states and never-firing transitions."""
    keep = bfs_order(a)
    kept = set(keep)
    trans = tuple(t for t in a.transitions if t.source in kept and feasible(a, t))
    regions = {q: a.regions[q] for q in keep} if a.regions is not None else None
    return a.replace(states=tuple(keep), accepting=a.accepting & kept,
                     transitions=trans, regions=regions)


def rename(a: Automaton, mapping: Dict[str, str]) -> Automaton:
    m = lambda q: mapping.get(q, q)
    return Automaton.build(
        a.alphabet, [m(q) for q in a.states], m(a.initial), {m(q) for q in a.accepting},
        [t._replace(source=m(t.source), target=m(t.target)) for t in a.transitions], a.k,
        {m(q): r for q, r in a.regions.items()} if a.regions is not None else None)


def isomorphic(a: Automaton, b: Automaton) -> bool:
    """Structural isomorphism of deterministic automata (reachable parts, same K)."""
    if a.k != b.k or a.alphabet != b.alphabet:
        return False
    a, b = prune(a), prune(b)
    if len(a.states) != len(b.states) or len(a.transitions) != len(b.transitions):
        return False
    pairing = {a.initial: b.initial}
    todo = [a.initial]
    while todo:
        p = todo.pop()
        q = pairing[p]
        if (p in a.accepting) != (q in b.accepting) or a.region(p) != b.region(q):
            return False
        for t in a.outgoing.get(p, []):
            u = b.table.get((q, t.letter, t.guard))
            if u is None or u.reset != t.reset:
                return False
            if t.target in pairing:
                if pairing[t.target] != u.target:
                    return False
            else:
                pairing[t.target] = u.target
                todo.append(t.target)
    return len(set(pairing.values())) == len(pairing)


# ------------------------------------------------------------------
# Files
# ------------------------------------------------------------------

def automaton_from_dict(data: dict) -> Automaton:
    try:
        k = int(data["k"])
        alphabet = list(data["alphabet"])
        states = list(data["states"])
        initial = data["initial"]
        accepting = list(data.get("accepting", []))
        raw = data.get("transitions", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed automaton: {exc}") from exc
    for letter in alphabet:
        if not isinstance(letter, str) or not letter or any(c.isspace() for c in letter):
            raise ParseError(f"bad letter {letter!r}")
    transitions = []
    for entry in raw:
        try:
            reset = int(entry["reset"])
            for g in parse_guard(str(entry["guard"]), k):
                transitions.append(Transition(entry["from"], entry["to"], entry["letter"], g, reset))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed transition {entry!r}: {exc}") from exc
    regions = None
    if data.get("regions") is not None:
        regions = {}
        for q, g in data["regions"].items():
            covered = parse_guard(g, k)
            if len(covered) != 1:
                raise ParseError(f"region of {q!r} must be a single region, got {g!r}")
            regions[q] = covered[0]
    return Automaton.build(alphabet, states, initial, accepting, transitions, k, regions)


def automaton_to_dict(a: Automaton) -> dict:
    data = {
        "alphabet": list(a.alphabet),
        "k": a.k,
        "states": list(a.states),
        "initial": a.initial,
        "accepting": [q for q in a.states if q in a.accepting],
        "transitions": [
            {"from": t.source, "to": t.target, "letter": t.letter,
             "guard": format_guard(t.guard, a.k), "reset": t.reset}
            for t in a.transitions
        ],
    }
    if a.regions is not None:
        data["regions"] = {q: format_guard(a.regions[q], a.k) for q in a.states}
    return data


def load_automaton(path: str) -> Automaton:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return automaton_from_dict(data)


def dump_automaton(a: Automaton) -> str:
    return json.dumps(automaton_to_dict(a), indent=2, ensure_ascii=False) + "\n"


def automaton_from_json(text: str) -> Automaton:
    return automaton_from_dict(json.loads(text))
