"""One-clock deterministic timed automata: semantics, canonical forms and active learning."""
from .core import (
    ABOVE, ZERO, Automaton, ParseError, Region, Transition, Open, Point, accepts,
    complete_with_sink, format_word, isomorphic, load_automaton, dump_automaton,
    parse_word, region_of, run, sigma_k, validate,
)
from .equiv import Verdict, bounded_oracle_equal, complement, equivalent, state_lang_equal
from .reset import enumerate_normal_forms, hi, normal_form, reset_trace, syntactic_reset
from .transform import (
    acceptorize, bound_reset_range, build_Aq, canonicalize, eliminate_bad_states,
    merge_equivalent_states, reduce_constant, strictify,
)
from .teacher import ScriptedTeacher, SimulatedTeacher, Teacher, simulated_teacher
from .learn import (
    Caps, CapExceeded, LearnerStats, ObservationTable, conjecture, is_closed,
    is_consistent, is_valid, learn_normal, learn_smart, postprocess_to_canonical,
    process_step, refine_smart,
)

__all__ = [
    "ABOVE",
    "ZERO",
    "Automaton",
    "ParseError",
    "Region",
    "Transition",
    "Open",
    "Point",
    "accepts",
    "complete_with_sink",
    "format_word",
    "isomorphic",
    "load_automaton",
    "dump_automaton",
    "parse_word",
    "region_of",
    "run",
    "sigma_k",
    "validate",
    "Verdict",
    "bounded_oracle_equal",
    "complement",
    "equivalent",
    "state_lang_equal",
    "enumerate_normal_forms",
    "hi",
    "normal_form",
    "reset_trace",
    "syntactic_reset",
    "acceptorize",
    "bound_reset_range",
    "build_Aq",
    "canonicalize",
    "eliminate_bad_states",
    "merge_equivalent_states",
    "reduce_constant",
    "strictify",
    "ScriptedTeacher",
    "SimulatedTeacher",
    "Teacher",
    "simulated_teacher",
    "Caps",
    "CapExceeded",
    "LearnerStats",
    "ObservationTable",
    "conjecture",
    "is_closed",
    "is_consistent",
    "is_valid",
    "learn_normal",
    "learn_smart",
    "postprocess_to_canonical",
    "process_step",
    "refine_smart",
]
