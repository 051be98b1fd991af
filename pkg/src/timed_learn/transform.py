"""
From any deterministic one-clock automaton to its canonical strict acceptor.

Stages: acceptorize, bound_reset_range, strictify, eliminate_bad_states,
merge_equivalent_states, reduce_constant. Each stage keeps the language.
"""
from __future__ import annotations

from typing import Callable, Dict, List, Optional, Tuple

from .core import (
    ABOVE, ZERO, Automaton, Open, Point, Region, Transition, all_regions,
    bfs_order, complete_with_sink, fresh_names, is_deterministic, prune,
    region_index, region_sample, regions_from, validate,
)
from .equiv import SCALE, SINK, Verdict, _fire12, equivalent, state_lang_equal

EqCheck = Callable[[Automaton], object]


def _need_acceptor(a: Automaton, what: str) -> None:
    if a.regions is None:
        raise ValueError(f"{what} needs an acceptor")


def _confirmed(result) -> bool:
    return result.equivalent if isinstance(result, Verdict) else bool(result)


def acceptorize(a: Automaton) -> Automaton:
    """Split every state into one copy per region of the clock on arrival."""
    if not is_deterministic(a):
        raise ValueError("acceptorize needs a deterministic automaton")
    a = complete_with_sink(a.replace(regions=None))
    k = a.k
    start = (a.initial, ZERO)
    order = [start]
    seen = {start}
    edges = []
    i = 0
    while i < len(order):
        q, r = order[i]
        i += 1
        for t in a.outgoing.get(q, []):
            if region_index(t.guard, k) < region_index(r, k):
                continue
            dest = (t.target, ZERO if t.reset == 0 else t.guard)
            edges.append(((q, r), dest, t))
            if dest not in seen:
                seen.add(dest)
                order.append(dest)
    names: Dict[Tuple[str, Region], str] = {}
    taken = set()
    extra = []
    for q, r in order:
        if q not in taken:
            names[(q, r)] = q
            taken.add(q)
        else:
            extra.append((q, r))
    for copy, name in zip(extra, fresh_names(a.states, len(extra))):
        names[copy] = name
    transitions = [Transition(names[src], names[dst], t.letter, t.guard, t.reset)
                   for src, dst, t in edges]
    return Automaton.build(
        a.alphabet, [names[c] for c in order], names[start],
        {names[c] for c in order if c[0] in a.accepting}, transitions, k,
        {names[c]: c[1] for c in order})


def bound_reset_range(acc: Automaton) -> Automaton:
    """Remove states whose clock is above K by resetting on the way in."""
    _need_acceptor(acc, "bound_reset_range")
    large = {q for q in acc.states if acc.regions[q] == ABOVE}
    if not large:
        return acc
    everything = all_regions(acc.k)
    out = []
    for t in acc.transitions:
        if t.source in large:
            if t.guard != ABOVE:
                continue
            out += [t._replace(guard=g, reset=0) for g in everything]
        elif t.target in large:
            out.append(t._replace(reset=0))
        else:
            out.append(t)
    regions = {q: (ZERO if q in large else r) for q, r in acc.regions.items()}
    return prune(acc.replace(transitions=tuple(out), regions=regions))


def _shift(g: Region, m: int, k: int) -> List[Region]:
    if g.is_point():
        return [Point(g.n - m)]
    if g.is_open():
        return [Open(g.n - m)]
    return regions_from(Open(k - m), k)


def strictify(acc: Automaton) -> Automaton:
    """Remove every state sitting on an integer clock value other than 0."""
    _need_acceptor(acc, "strictify")
    if any(r == ABOVE for r in acc.regions.values()):
        raise ValueError("strictify needs clock values bounded by K; run bound_reset_range first")
    k = acc.k
    while True:
        ints = [r.n for r in acc.regions.values() if r.is_point() and r.n >= 1]
        if not ints:
            return acc
        acc = _strictify_level(acc, max(ints), k)


def _strictify_level(acc: Automaton, m: int, k: int) -> Automaton:
    regions = acc.regions
    critical = [q for q in acc.states if regions[q] == Point(m)]
    late = [q for q in acc.states if regions[q].is_open() and regions[q].n >= m]
    crit = set(critical)
    bar = {q: q for q in critical}
    bar.update(zip(late, fresh_names(acc.states, len(late))))
    out = []
    for t in acc.transitions:
        if t.source not in crit and t.target not in crit:
            out.append(t)
        elif t.source not in crit and t.guard == Point(m) and t.reset == 1:
            out.append(t._replace(reset=0))
    for t in acc.transitions:
        if t.source not in bar:
            continue
        s = bar[t.source]
        if t.reset == 1 and t.guard == Point(m) and t.target in crit:
            out.append(Transition(s, bar[t.target], t.letter, ZERO, 0))
        elif t.reset == 1 and t.guard.is_open() and t.guard.n >= m:
            out.append(Transition(s, bar[t.target], t.letter, Open(t.guard.n - m), 1))
        elif t.reset == 0:
            out += [Transition(s, t.target, t.letter, g, 0) for g in _shift(t.guard, m, k)]
    new_regions = {q: r for q, r in regions.items() if q not in crit}
    for q in critical:
        new_regions[q] = ZERO
    for q in late:
        new_regions[bar[q]] = Open(regions[q].n - m)
    accepting = set(acc.accepting) | {bar[q] for q in late if q in acc.accepting}
    states = list(acc.states) + [bar[q] for q in late]
    return prune(acc.replace(states=tuple(states), accepting=frozenset(accepting),
                             transitions=tuple(out), regions=new_regions))


def _exit_targets(acc: Automaton, q: str) -> Dict[str, str]:
    """For each letter, where q goes on x=K (or, failing that, above K)."""
    targets = {}
    for letter in acc.alphabet:
        t = acc.table.get((q, letter, Point(acc.k))) or acc.table.get((q, letter, ABOVE))
        if t is None:
            raise ValueError(f"state {q!r} has no exit on {letter!r}")
        targets[letter] = t.target
    return targets


def build_Aq(acc: Automaton, q: str) -> Automaton:
    """Make q a reset state: incoming edges reset, and every delay leads to q's x=K successors."""
    _need_acceptor(acc, "build_Aq")
    if acc.regions[q] == ZERO:
        raise ValueError(f"state {q!r} already has region x=0")
    targets = _exit_targets(acc, q)
    out = []
    for t in acc.transitions:
        if t.source == q:
            continue
        if t.target == q and t.reset == 1:
            t = t._replace(reset=0)
        out.append(t)
    out += [Transition(q, targets[letter], letter, g, 0)
            for letter in acc.alphabet for g in all_regions(acc.k)]
    regions = dict(acc.regions)
    regions[q] = ZERO
    return prune(acc.replace(transitions=tuple(out), regions=regions))


def eliminate_bad_states(acc: Automaton, eq_check: EqCheck) -> Automaton:
    """Try the reset surgery on each non-zero-region state; keep it when eq_check confirms."""
    _need_acceptor(acc, "eliminate_bad_states")
    for q in bfs_order(acc):
        if q not in acc.regions or acc.regions[q] == ZERO:
            continue
        candidate = build_Aq(acc, q)
        if _confirmed(eq_check(candidate)):
            acc = candidate
    return acc


def _merge(acc: Automaton, keep: str, drop: str) -> Automaton:
    out = [t._replace(target=keep if t.target == drop else t.target)
           for t in acc.transitions if t.source != drop]
    states = tuple(q for q in acc.states if q != drop)
    regions = {q: r for q, r in acc.regions.items() if q != drop}
    return prune(acc.replace(states=states, accepting=acc.accepting - {drop},
                             transitions=tuple(out), regions=regions))


def _signatures(acc: Automaton) -> Dict[str, Tuple[bool, ...]]:
    """Membership of each state on half-integral words of length <= 2, as a cheap merge filter."""
    steps = [(SCALE * i // 2, x) for i in range(2 * acc.k + 3) for x in acc.alphabet]

    def probe(q, v, depth):
        out = [q is not SINK and q in acc.accepting]
        if depth:
            for d, x in steps:
                out += probe(*_fire12(acc, q, x, v + d), depth - 1)
        return out
    return {q: tuple(probe(q, int(SCALE * region_sample(acc.regions[q], acc.k)), 2))
            for q in acc.states}


def merge_equivalent_states(acc: Automaton, eq_check: Optional[EqCheck] = None) -> Automaton:
    """Merge same-region states with equal residual languages until none remain.

    Without eq_check, pairs are found with state_lang_equal and each merge is
    re-checked against the input. With eq_check (a teacher), every same-region
    pair is proposed and kept only when eq_check confirms.
    """
    _need_acceptor(acc, "merge_equivalent_states")
    reference = acc
    rejected = set()
    sig = _signatures(acc) if eq_check is None else None
    while True:
        order = bfs_order(acc)
        merged = False
        for i, q in enumerate(order):
            for q2 in order[i + 1:]:
                if acc.regions[q] != acc.regions[q2] or q2 == acc.initial:
                    continue
                if eq_check is None:
                    if sig[q] != sig[q2] or not state_lang_equal(acc, q, q2):
                        continue
                    candidate = _merge(acc, q, q2)
                    if not equivalent(candidate, reference).equivalent:
                        continue
                else:
                    if (q, q2) in rejected:
                        continue
                    candidate = _merge(acc, q, q2)
                    if not _confirmed(eq_check(candidate)):
                        rejected.add((q, q2))
                        continue
                acc = candidate
                merged = True
                break
            if merged:
                break
        if not merged:
            return acc


def reduce_constant(acc: Automaton) -> Automaton:
    """Lower K to the least m such that all moves above m reset into the above-K successor."""
    _need_acceptor(acc, "reduce_constant")
    k = acc.k
    above = {(t.source, t.letter): t.target for t in acc.transitions if t.guard == ABOVE}

    def holds(m: int) -> bool:
        for t in acc.transitions:
            if region_index(t.guard, k) > 2 * m:
                if t.reset != 0 or above.get((t.source, t.letter)) != t.target:
                    return False
        return all(region_index(r, k) <= 2 * m for r in acc.regions.values())

    m = next(m for m in range(k + 1) if m == k or holds(m))
    if m == k:
        return acc
    out = [t for t in acc.transitions if region_index(t.guard, k) <= 2 * m]
    out += [Transition(q, target, letter, ABOVE, 0) for (q, letter), target in above.items()]
    return acc.replace(transitions=tuple(out), k=m)


def reset_canonical_acceptor(a: Automaton, stages: Optional[list] = None) -> Automaton:
    """Strict acceptor for L(a) whose reset function is the syntactic one."""
    reference = complete_with_sink(a.replace(regions=None))
    acc = acceptorize(reference)
    _note(stages, "acceptorize", acc)
    acc = bound_reset_range(acc)
    _note(stages, "bound_reset_range", acc)
    acc = strictify(acc)
    _note(stages, "strictify", acc)
    acc = eliminate_bad_states(acc, lambda cand: equivalent(cand, reference))
    _note(stages, "eliminate_bad_states", acc)
    return acc


def canonicalize(a: Automaton, stages: Optional[list] = None) -> Automaton:
    """The canonical strict acceptor of L(a)."""
    bad = [d for d in validate(a) if d.startswith("nondeterminism")]
    if bad:
        raise ValueError(bad[0])
    acc = reset_canonical_acceptor(a, stages)
    acc = merge_equivalent_states(acc)
    _note(stages, "merge_equivalent_states", acc)
    acc = reduce_constant(acc)
    _note(stages, "reduce_constant", acc)
    return acc


def _note(stages, name, acc):
    if stages is not None:
        stages.append((name, acc))
