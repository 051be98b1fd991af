"""Command-line front end.

Exit codes: 0 success, 1 negative answer (non-member, not equivalent,
invalid automaton), 2 usage or parse error, 3 a learning cap was hit.
"""
from __future__ import annotations

import argparse
import importlib.util
import json
import os
import re
import sys
from dataclasses import asdict
from typing import List, Optional

from .core import (
    ParseError, Automaton, Transition, accepts, complete_with_sink, dump_automaton,
    format_delay, format_guard, format_word, load_automaton, parse_guard, parse_word,
    run, validate,
)
from .equiv import equivalent
from .learn import Caps, CapExceeded, learn_normal, learn_smart, postprocess_to_canonical
from .reset import normal_form, reset_trace, syntactic_trace
from .teacher import Teacher, simulated_teacher
from .transform import (
    acceptorize, bound_reset_range, canonicalize, strictify,
)

OK, NEGATIVE, USAGE, CAP = 0, 1, 2, 3


# ------------------------------------------------------------------
# DOT
# ------------------------------------------------------------------

def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(a: Automaton) -> str:
    """Graphviz text; resetting edges are dashed, labels read "letter, guard, reset"."""
    k = a.k
    lines = [
        "digraph automaton {",
        "  rankdir=LR;",
        f'  graph [k={k}, alphabet={_q(" ".join(a.alphabet))}];',
    ]
    if a.states:
        lines.append('  "__start" [shape=point];')
        for q in a.states:
            attrs = ["shape=doublecircle" if q in a.accepting else "shape=circle"]
            if a.regions is not None and q in a.regions:
                attrs.append(f"region={_q(format_guard(a.regions[q], k))}")
            lines.append(f"  {_q(q)} [{', '.join(attrs)}];")
        lines.append(f'  "__start" -> {_q(a.initial)};')
    for t in a.transitions:
        label = f"{t.letter}, {format_guard(t.guard, k)}, {t.reset}"
        style = ", style=dashed" if t.reset == 0 else ""
        lines.append(f"  {_q(t.source)} -> {_q(t.target)} [label={_q(label)}{style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_STR = r'"((?:[^"\\]|\\.)*)"'
_GRAPH = re.compile(r"^\s*graph \[k=(\d+), alphabet=" + _STR + r"\];$")
_NODE = re.compile(r"^\s*" + _STR + r" \[shape=(\w+)(?:, region=" + _STR + r")?\];$")
_EDGE = re.compile(r"^\s*" + _STR + r" -> " + _STR + r"(?: \[label=" + _STR + r"(?:, style=dashed)?\])?;$")


def _unq(text: str) -> str:
    return re.sub(r"\\(.)", r"\1", text)


def automaton_from_dot(text: str) -> Automaton:
    """Read back the output of export_dot."""
    k, alphabet = None, []
    states, accepting, regions, transitions = [], set(), {}, []
    initial = None
    for line in text.splitlines():
        if m := _GRAPH.match(line):
            k, alphabet = int(m.group(1)), _unq(m.group(2)).split()
        elif m := _NODE.match(line):
            name = _unq(m.group(1))
            if name == "__start":
                continue
            states.append(name)
            if m.group(2) == "doublecircle":
                accepting.add(name)
            if m.group(3) is not None:
                regions[name] = parse_guard(_unq(m.group(3)), k)[0]
        elif m := _EDGE.match(line):
            src, dst = _unq(m.group(1)), _unq(m.group(2))
            if src == "__start":
                initial = dst
                continue
            letter, guard, reset = (p.strip() for p in _unq(m.group(3)).split(","))
            (g,) = parse_guard(guard, k)
            transitions.append(Transition(src, dst, letter, g, int(reset)))
    if k is None:
        raise ParseError("not a DOT file written by export-dot")
    has_regions = bool(regions) or any("region=" in line for line in text.splitlines())
    return Automaton.build(alphabet, states, initial, accepting, transitions, k,
                           regions if has_regions else None)


# ------------------------------------------------------------------
# Subcommands
# ------------------------------------------------------------------

def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _trace(stages, directory: Optional[str]) -> None:
    if directory is None:
        return
    os.makedirs(directory, exist_ok=True)
    for i, (name, acc) in enumerate(stages, 1):
        _write(dump_automaton(acc), os.path.join(directory, f"{i:02d}-{name}.json"))


def _word(a: Automaton, text: str):
    w = parse_word(text)
    stray = sorted({letter for _, letter in w} - set(a.alphabet))
    if stray:
        raise ParseError(f"letters not in the alphabet: {' '.join(stray)}")
    return w


def cmd_validate(args) -> int:
    problems = validate(load_automaton(args.automaton))
    for p in problems:
        print(p)
    if not problems:
        print("valid")
    return NEGATIVE if problems else OK


def cmd_run(args) -> int:
    a = complete_with_sink(load_automaton(args.automaton))
    r = run(a, _word(a, args.word))
    for (q, v), t, d in r.steps:
        print(f"({q}, {format_delay(v)}) --{format_delay(d)}, {t.letter}, "
              f"{format_guard(t.guard, a.k)}, {t.reset}--> {t.target}")
    q, v = r.final
    print(f"final ({q}, {format_delay(v)}) {'accepting' if q in a.accepting else 'rejecting'}")
    return OK


def cmd_member(args) -> int:
    a = load_automaton(args.automaton)
    inside = accepts(a, _word(a, args.word))
    print("member" if inside else "non-member")
    return OK if inside else NEGATIVE


def cmd_equiv(args) -> int:
    a = complete_with_sink(load_automaton(args.first))
    b = complete_with_sink(load_automaton(args.second))
    verdict = equivalent(a, b)
    if verdict.equivalent:
        print("equivalent")
        return OK
    print(format_word(verdict.word))
    print(f"accepted by {(args.first, args.second)[verdict.accepted_by]}", file=sys.stderr)
    return NEGATIVE


def cmd_acceptorize(args) -> int:
    out = acceptorize(load_automaton(args.automaton))
    _trace([("acceptorize", out)], args.trace)
    _write(dump_automaton(out), args.output)
    return OK


def cmd_strictify(args) -> int:
    a = load_automaton(args.automaton)
    stages = []
    if a.regions is None:
        a = acceptorize(a)
        stages.append(("acceptorize", a))
    a = bound_reset_range(complete_with_sink(a))
    stages.append(("bound_reset_range", a))
    a = strictify(a)
    stages.append(("strictify", a))
    _trace(stages, args.trace)
    _write(dump_automaton(a), args.output)
    return OK


def cmd_canonicalize(args) -> int:
    stages = []
    out = canonicalize(load_automaton(args.automaton), stages)
    _trace(stages, args.trace)
    _write(dump_automaton(out), args.output)
    return OK


def _values(values) -> str:
    return " ".join(format_delay(v) for v in values)


def cmd_normal_form(args) -> int:
    a = complete_with_sink(load_automaton(args.automaton))
    w = _word(a, args.word)
    trace = syntactic_trace(a, w) if args.syntactic else reset_trace(a, w)
    print(f"trace: {_values(trace)}")
    print(f"normal form: {format_word(normal_form(trace, w))}")
    return OK


def cmd_reset(args) -> int:
    a = complete_with_sink(load_automaton(args.automaton))
    w = _word(a, args.word)
    trace = syntactic_trace(a, w) if args.syntactic else reset_trace(a, w)
    print(_values(trace))
    return OK


def cmd_export_dot(args) -> int:
    _write(export_dot(load_automaton(args.automaton)), args.output)
    return OK


def load_teacher_script(path: str):
    """Import a Python file defining teacher() and ALPHABET."""
    spec = importlib.util.spec_from_file_location("timed_learn_teacher_script", path)
    if spec is None or spec.loader is None:
        raise ParseError(f"cannot load teacher script {path}")
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    if not hasattr(module, "teacher") or not hasattr(module, "ALPHABET"):
        raise ParseError(f"{path} must define teacher() and ALPHABET")
    return module.teacher(), list(module.ALPHABET)


def cmd_learn(args) -> int:
    if (args.target is None) == (args.teacher is None):
        raise ParseError("give exactly one of --target and --teacher")
    teacher: Teacher
    if args.target is not None:
        target = load_automaton(args.target)
        teacher, alphabet = simulated_teacher(target), list(target.alphabet)
    else:
        teacher, alphabet = load_teacher_script(args.teacher)
    caps = Caps()
    if args.max_k is not None:
        caps.max_k = args.max_k
    if args.max_tables is not None:
        caps.max_tables = args.max_tables
    if args.max_pool is not None:
        caps.max_pool = args.max_pool
    try:
        if args.mode == "smart":
            result, stats = learn_smart(teacher, alphabet, caps)
        else:
            result, stats = learn_normal(teacher, alphabet, caps)
            if args.canonical:
                result = postprocess_to_canonical(result, teacher)
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return CAP
    stats.equivalence_queries = max(stats.equivalence_queries, teacher.equivalence_queries)
    if args.stats is not None:
        _write(json.dumps(asdict(stats), indent=2) + "\n", args.stats)
    _write(dump_automaton(result), args.output)
    return OK


# ------------------------------------------------------------------
# Driver
# ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="timed-learn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = command("validate", cmd_validate, "list determinism, completeness and acceptor violations")
    p.add_argument("automaton")
    for name, func, help_text in (("run", cmd_run, "print the run of a word"),
                                  ("member", cmd_member, "exit 0 if the word is accepted, 1 if not")):
        p = command(name, func, help_text)
        p.add_argument("automaton")
        p.add_argument("word", help='e.g. "0.5:a 0:b"; "ε" for the empty word')
    p = command("equiv", cmd_equiv, "decide language equivalence")
    p.add_argument("first")
    p.add_argument("second")
    for name, func, help_text in (("acceptorize", cmd_acceptorize, "split states by clock region"),
                                  ("strictify", cmd_strictify, "equivalent strict acceptor"),
                                  ("canonicalize", cmd_canonicalize, "canonical strict acceptor")):
        p = command(name, func, help_text)
        p.add_argument("automaton")
        p.add_argument("-o", "--output")
        p.add_argument("--trace", metavar="DIR", help="write each stage to DIR as numbered files")
    for name, func, help_text in (("normal-form", cmd_normal_form, "reset trace and half-integral normal form"),
                                  ("reset", cmd_reset, "clock value after each prefix")):
        p = command(name, func, help_text)
        p.add_argument("--syntactic", action="store_true",
                       help="use the language's syntactic reset function")
        p.add_argument("automaton")
        p.add_argument("word")
    p = command("export-dot", cmd_export_dot, "Graphviz rendering")
    p.add_argument("automaton")
    p.add_argument("-o", "--output")
    p = command("learn", cmd_learn, "learn an automaton from a teacher")
    p.add_argument("--mode", choices=("smart", "normal"), default="smart")
    p.add_argument("--target", help="automaton the simulated teacher hides")
    p.add_argument("--teacher", help="Python file defining teacher() and ALPHABET")
    p.add_argument("-o", "--output")
    p.add_argument("--canonical", action="store_true",
                   help="normal mode: post-process to the canonical acceptor")
    p.add_argument("--stats", help="write learner statistics as JSON")
    p.add_argument("--max-k", type=int)
    p.add_argument("--max-tables", type=int)
    p.add_argument("--max-pool", type=int)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.func(args)
    except (ParseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
