"""Safety proofs for parameterized systems with non-atomic global checks.

The pipeline: find trap invariants of finite instances with a SAT-backed
refinement loop (`traps.cegar`), generalize them into size-independent
trap languages (`abduction.abduct`), then discharge the inductivity of the
property under those languages for every instance size at once through
first-order problems handed to a resolution prover (`folcheck`).
"""

from .abduction import (
    NormalizedTrap,
    Token,
    TrapLanguage,
    abduct,
    concretize,
    drop_agent,
    drop_letter,
    language_from_json,
    language_to_json,
    move_marks_left,
    move_marks_right,
    normalize,
    pump,
    rendezvous_degree,
    words_of,
)
from .builtins import builtin, builtin_names
from .dsl import ParseError, parse_guard, parse_property, parse_system, pretty_print
from .folcheck import (
    FOProblem,
    InductivityReport,
    build_eta,
    build_phi,
    build_property,
    build_psi,
    build_tau,
    check_inductivity,
    emit_tptp,
    eval_formula,
    inductivity_problems,
    parse_tptp,
    prover_command,
    run_prover,
    structure_from_config,
    structure_from_pair,
)
from .model import (
    Capture,
    LocalTransition,
    LoopTransition,
    ModelError,
    ParamSystem,
    PointerDecl,
    VariableDecl,
    validate_system,
)
from .semantics import (
    ARROW,
    BLANK,
    Letter,
    Occurrence,
    check_property_explicit,
    enumerate_occurrences,
    eval_property_config,
    format_config,
    initial_config,
    reachable,
    successors,
)
from .traps import (
    CegarResult,
    Powerword,
    cegar,
    encode_trap_constraints,
    find_counterexample,
    find_excluding_trap,
    intersects,
    is_trap_exact,
    is_trap_structural,
    powerword_from_json,
    powerword_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "ARROW",
    "BLANK",
    "Capture",
    "CegarResult",
    "FOProblem",
    "InductivityReport",
    "Letter",
    "LocalTransition",
    "LoopTransition",
    "ModelError",
    "NormalizedTrap",
    "Occurrence",
    "ParamSystem",
    "ParseError",
    "PointerDecl",
    "Powerword",
    "Token",
    "TrapLanguage",
    "VariableDecl",
    "abduct",
    "build_eta",
    "build_phi",
    "build_property",
    "build_psi",
    "build_tau",
    "builtin",
    "builtin_names",
    "cegar",
    "check_inductivity",
    "check_property_explicit",
    "concretize",
    "drop_agent",
    "drop_letter",
    "emit_tptp",
    "encode_trap_constraints",
    "enumerate_occurrences",
    "eval_formula",
    "eval_property_config",
    "find_counterexample",
    "find_excluding_trap",
    "format_config",
    "inductivity_problems",
    "initial_config",
    "intersects",
    "is_trap_exact",
    "is_trap_structural",
    "language_from_json",
    "language_to_json",
    "move_marks_left",
    "move_marks_right",
    "normalize",
    "parse_guard",
    "parse_property",
    "parse_system",
    "parse_tptp",
    "powerword_from_json",
    "powerword_to_json",
    "pretty_print",
    "prover_command",
    "pump",
    "reachable",
    "rendezvous_degree",
    "run_prover",
    "structure_from_config",
    "structure_from_pair",
    "successors",
    "validate_system",
    "words_of",
]
