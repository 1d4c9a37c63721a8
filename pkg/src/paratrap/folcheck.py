"""First-order rendering of the step relation and trap languages.

Positions 0..N-1 become the universe of a first-order structure: a monadic
predicate per location and per variable value describes a configuration,
one monadic function per loop transition holds each agent's inspection
position, and one per pointer (read at position zero) holds the pointee.
Primed copies of all of that describe the successor configuration.

On top of this the module builds: consistency axioms (every agent has
exactly one location and one value per variable), linear order axioms for
the positions, a formula per transition capturing exactly its step
relation, a formula per trap language saying the configuration meets every
word of the language, and the property as a counting formula.  Inductivity
of the property relative to the languages is then a finite list of
entailments, emitted as TPTP problems for a resolution prover.  Everything
can also be evaluated directly on finite structures, which is how the
formulas are cross-checked against the explicit-state semantics in the
test suite.
"""

from __future__ import annotations

import itertools
import os
import re
import shlex
import shutil
import subprocess
import time
from dataclasses import dataclass

from .abduction import TrapLanguage, validate_language
from .model import (
    AtLeastState,
    AtLeastVar,
    Guard,
    GuardAnd,
    GuardConst,
    GuardNot,
    GuardOr,
    GuardSelf,
    GuardVarEq,
    LocalTransition,
    LoopTransition,
    ModelError,
    ParamSystem,
    PropAnd,
    PropNot,
    PropOr,
    local_label,
)
from .semantics import ARROW, BLANK


# ---------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TConst:
    name: str  # "zero" or "last"


@dataclass(frozen=True)
class TSucc:
    arg: object


@dataclass(frozen=True)
class TApp:
    func: str
    arg: object


ZERO = TConst("zero")
LAST = TConst("last")


@dataclass(frozen=True)
class FTrue:
    pass


@dataclass(frozen=True)
class FFalse:
    pass


@dataclass(frozen=True)
class FPred:
    name: str
    arg: object


@dataclass(frozen=True)
class FEq:
    left: object
    right: object


@dataclass(frozen=True)
class FLe:
    left: object
    right: object


@dataclass(frozen=True)
class FNot:
    inner: object


@dataclass(frozen=True)
class FAnd:
    items: tuple


@dataclass(frozen=True)
class FOr:
    items: tuple


@dataclass(frozen=True)
class FImplies:
    left: object
    right: object


@dataclass(frozen=True)
class FIff:
    left: object
    right: object


@dataclass(frozen=True)
class FForAll:
    names: tuple
    body: object


@dataclass(frozen=True)
class FExists:
    names: tuple
    body: object


TRUE = FTrue()
FALSE = FFalse()


def conj(items):
    out = []
    for item in items:
        if isinstance(item, FFalse):
            return FALSE
        if not isinstance(item, FTrue):
            out.append(item)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return FAnd(tuple(out))


def disj(items):
    out = []
    for item in items:
        if isinstance(item, FTrue):
            return TRUE
        if not isinstance(item, FFalse):
            out.append(item)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return FOr(tuple(out))


def flt(a, b):
    """Strict order, spelled with leq and equality."""
    return FAnd((FLe(a, b), FNot(FEq(a, b))))


# ---------------------------------------------------------------------------
# finite structures and evaluation


@dataclass
class Structure:
    size: int
    preds: dict
    funcs: dict


def eval_term(term, struct: Structure, env) -> int:
    if isinstance(term, TVar):
        return env[term.name]
    if isinstance(term, TConst):
        if term.name == "zero":
            return 0
        if term.name == "last":
            return struct.size - 1
        raise ModelError(f"unknown constant {term.name}")
    if isinstance(term, TSucc):
        return min(eval_term(term.arg, struct, env) + 1, struct.size - 1)
    if isinstance(term, TApp):
        if term.func not in struct.funcs:
            raise ModelError(f"structure has no function {term.func}")
        return struct.funcs[term.func][eval_term(term.arg, struct, env)]
    raise ModelError(f"not a term: {term!r}")


def eval_formula(formula, struct: Structure, env=None) -> bool:
    if env is None:
        env = {}
    f = formula
    if isinstance(f, FTrue):
        return True
    if isinstance(f, FFalse):
        return False
    if isinstance(f, FPred):
        if f.name not in struct.preds:
            raise ModelError(f"structure has no predicate {f.name}")
        return eval_term(f.arg, struct, env) in struct.preds[f.name]
    if isinstance(f, FEq):
        return eval_term(f.left, struct, env) == eval_term(f.right, struct, env)
    if isinstance(f, FLe):
        return eval_term(f.left, struct, env) <= eval_term(f.right, struct, env)
    if isinstance(f, FNot):
        return not eval_formula(f.inner, struct, env)
    if isinstance(f, FAnd):
        return all(eval_formula(i, struct, env) for i in f.items)
    if isinstance(f, FOr):
        return any(eval_formula(i, struct, env) for i in f.items)
    if isinstance(f, FImplies):
        return (not eval_formula(f.left, struct, env)) or eval_formula(f.right, struct, env)
    if isinstance(f, FIff):
        return eval_formula(f.left, struct, env) == eval_formula(f.right, struct, env)
    if isinstance(f, (FForAll, FExists)):
        domain = range(struct.size)
        combos = itertools.product(domain, repeat=len(f.names))
        child = dict(env)
        if isinstance(f, FForAll):
            for values in combos:
                child.update(zip(f.names, values))
                if not eval_formula(f.body, struct, child):
                    return False
            return True
        for values in combos:
            child.update(zip(f.names, values))
            if eval_formula(f.body, struct, child):
                return True
        return False
    raise ModelError(f"not a formula: {f!r}")


def _suffix(primed: bool) -> str:
    return "_p" if primed else ""


def _config_symbols(sys: ParamSystem, config, primed: bool):
    n = len(config)
    sfx = _suffix(primed)
    preds = {f"loc_{q}{sfx}": set() for q in sys.loc_values()}
    for var in sys.variables:
        for v in var.values:
            preds[f"x_{var.name}_{v}{sfx}"] = set()
    funcs = {}
    for t in sys.loop_transitions:
        funcs[f"f_{t.name}{sfx}"] = [0] * n
    for p in sys.pointers:
        funcs[f"f_{p.name}{sfx}"] = [0] * n
    for j, letter in enumerate(config):
        preds[f"loc_{letter.loc}{sfx}"].add(j)
        for var, v in zip(sys.variables, letter.vals):
            preds[f"x_{var.name}_{v}{sfx}"].add(j)
        for mark in letter.marks:
            if isinstance(mark, tuple):
                agent, t = mark
                funcs[f"f_{t}{sfx}"][agent] = j
            else:
                funcs[f"f_{mark}{sfx}"][0] = j
    return preds, {name: tuple(vals) for name, vals in funcs.items()}


def structure_from_config(sys: ParamSystem, config, primed: bool = False) -> Structure:
    """Canonical structure for one configuration: marks become inspection
    positions, everything unmarked gets function value zero."""
    preds, funcs = _config_symbols(sys, config, primed)
    return Structure(len(config), preds, funcs)


def structure_from_pair(sys: ParamSystem, config, successor) -> Structure:
    if len(config) != len(successor):
        raise ModelError("pair structures need equal instance sizes")
    preds, funcs = _config_symbols(sys, config, False)
    preds2, funcs2 = _config_symbols(sys, successor, True)
    preds.update(preds2)
    funcs.update(funcs2)
    return Structure(len(config), preds, funcs)


# ---------------------------------------------------------------------------
# formula builders


def _loc(q: str, primed: bool) -> str:
    return f"loc_{q}{_suffix(primed)}"


def _xvar(var: str, value: str, primed: bool) -> str:
    return f"x_{var}_{value}{_suffix(primed)}"


def _func(name: str, primed: bool) -> str:
    return f"f_{name}{_suffix(primed)}"


def build_eta(sys: ParamSystem, primed: bool = False):
    """Every agent sits at exactly one location and holds exactly one value
    per variable."""
    i = TVar("i")
    parts = []
    locs = sys.loc_values()
    parts.append(disj([
        conj([FPred(_loc(q, primed), i)]
             + [FNot(FPred(_loc(r, primed), i)) for r in locs if r != q])
        for q in locs
    ]))
    for var in sys.variables:
        parts.append(disj([
            conj([FPred(_xvar(var.name, v, primed), i)]
                 + [FNot(FPred(_xvar(var.name, w, primed), i))
                    for w in var.values if w != v])
            for v in var.values
        ]))
    return FForAll(("i",), conj(parts))


def psi_axioms():
    """The positions form a finite linear order with endpoints and a
    successor; all named, ready for a TPTP file."""
    x, y, z = TVar("x"), TVar("y"), TVar("z")
    succ_body = FImplies(
        FNot(FEq(x, LAST)),
        FAnd((
            flt(x, TSucc(x)),
            FForAll(("y",), FNot(FAnd((flt(x, y), flt(y, TSucc(x)))))),
        )),
    )
    return (
        ("psi_refl", FForAll(("x",), FLe(x, x))),
        ("psi_antisym", FForAll(("x", "y"),
                                FImplies(FAnd((FLe(x, y), FLe(y, x))), FEq(x, y)))),
        ("psi_trans", FForAll(("x", "y", "z"),
                              FImplies(FAnd((FLe(x, y), FLe(y, z))), FLe(x, z)))),
        ("psi_total", FForAll(("x", "y"), FOr((FLe(x, y), FLe(y, x))))),
        ("psi_bounds", FForAll(("x",), FAnd((FLe(ZERO, x), FLe(x, LAST))))),
        ("psi_ends", FNot(FEq(ZERO, LAST))),
        ("psi_succ", FForAll(("x",), succ_body)),
    )


def build_psi():
    return conj([f for _, f in psi_axioms()])


def build_initial(sys: ParamSystem):
    i = TVar("i")
    per_agent = [FPred(_loc(sys.initial_state, False), i)]
    for var in sys.variables:
        per_agent.append(FPred(_xvar(var.name, var.initial, False), i))
    parts = [FForAll(("i",), conj(per_agent))]
    for p in sys.pointers:
        parts.append(FEq(TApp(_func(p.name, False), ZERO), ZERO))
    return conj(parts)


def build_property(sys: ParamSystem, prop, primed: bool = False):
    if isinstance(prop, AtLeastState):
        return _at_least(FPred, _loc(prop.state, primed), prop.count)
    if isinstance(prop, AtLeastVar):
        return _at_least(FPred, _xvar(prop.var, prop.value, primed), prop.count)
    if isinstance(prop, PropNot):
        return FNot(build_property(sys, prop.inner, primed))
    if isinstance(prop, PropAnd):
        return conj([build_property(sys, p, primed) for p in prop.items])
    if isinstance(prop, PropOr):
        return disj([build_property(sys, p, primed) for p in prop.items])
    raise ModelError(f"unknown property node {prop!r}")


def _at_least(pred_ctor, pred_name: str, count: int):
    names = tuple(f"a{j}" for j in range(1, count + 1))
    terms = [TVar(name) for name in names]
    parts = [FNot(FEq(a, b)) for a, b in itertools.combinations(terms, 2)]
    parts += [pred_ctor(pred_name, t) for t in terms]
    return FExists(names, conj(parts))


def size_floor_formula(m: int):
    """At least m distinct positions exist.  Useful when a property only
    holds from some instance size on."""
    if m <= 1:
        return TRUE
    names = tuple(f"s{j}" for j in range(1, m + 1))
    terms = [TVar(name) for name in names]
    parts = [FNot(FEq(a, b)) for a, b in itertools.combinations(terms, 2)]
    return FExists(names, conj(parts))


def _guard_formula(sys: ParamSystem, guard: Guard, pos, self_term, primed: bool = False):
    if isinstance(guard, GuardConst):
        return TRUE if guard.value else FALSE
    if isinstance(guard, GuardVarEq):
        return FPred(_xvar(guard.var, guard.value, primed), pos)
    if isinstance(guard, GuardSelf):
        return FEq(pos, self_term)
    if isinstance(guard, GuardNot):
        return FNot(_guard_formula(sys, guard.inner, pos, self_term, primed))
    if isinstance(guard, GuardAnd):
        return conj([_guard_formula(sys, g, pos, self_term, primed)
                     for g in guard.items])
    if isinstance(guard, GuardOr):
        return disj([_guard_formula(sys, g, pos, self_term, primed)
                     for g in guard.items])
    raise ModelError(f"unknown guard node {guard!r}")


def _var_frame(sys: ParamSystem, term):
    parts = []
    for var in sys.variables:
        for v in var.values:
            parts.append(FIff(FPred(_xvar(var.name, v, False), term),
                              FPred(_xvar(var.name, v, True), term)))
    return conj(parts)


def _loc_frame(sys: ParamSystem, term):
    return conj([FIff(FPred(_loc(q, False), term), FPred(_loc(q, True), term))
                 for q in sys.loc_values()])


def _loops_frame(sys: ParamSystem, term):
    return conj([FEq(TApp(_func(t.name, True), term), TApp(_func(t.name, False), term))
                 for t in sys.loop_transitions])


def _pointer_frames(sys: ParamSystem, skip=None):
    parts = []
    for p in sys.pointers:
        if p.name == skip:
            continue
        parts.append(FEq(TApp(_func(p.name, True), ZERO),
                         TApp(_func(p.name, False), ZERO)))
    return parts


def _others_frame(sys: ParamSystem, i, vars_too: bool):
    k = TVar("k")
    frames = [_loc_frame(sys, k), _loops_frame(sys, k)]
    if vars_too:
        frames.append(_var_frame(sys, k))
    return FForAll(("k",), FImplies(FNot(FEq(k, i)), conj(frames)))


def _tau_local(sys: ParamSystem, t: LocalTransition):
    i = TVar("i")
    assigned = dict(t.assignments)
    parts = [FPred(_loc(t.origin, False), i), FPred(_loc(t.target, True), i)]
    for var in sys.variables:
        if var.name in assigned:
            parts.append(FPred(_xvar(var.name, assigned[var.name], True), i))
        else:
            for v in var.values:
                parts.append(FIff(FPred(_xvar(var.name, v, False), i),
                                  FPred(_xvar(var.name, v, True), i)))
    if t.pointer_guard is not None:
        pg = t.pointer_guard
        pointee = TApp(_func(pg.pointer, False), ZERO)
        parts.append(FPred(_xvar(pg.var, pg.value, False), pointee))
    for p in sys.pointers:
        if t.sets_pointer == p.name:
            parts.append(FEq(TApp(_func(p.name, True), ZERO), i))
        else:
            parts.append(FEq(TApp(_func(p.name, True), ZERO),
                             TApp(_func(p.name, False), ZERO)))
    parts.append(_others_frame(sys, i, vars_too=True))
    return FExists(("i",), conj(parts))


def _tau_loop(sys: ParamSystem, t: LoopTransition):
    i = TVar("i")
    f_t = _func(t.name, False)
    f_t_p = _func(t.name, True)
    inspectee = TApp(f_t, i)

    start = [
        FPred(_loc(t.origin, False), i),
        FPred(_loc(t.name, True), i),
        FEq(TApp(f_t_p, i), ZERO),
    ]
    start.extend(_pointer_frames(sys))
    start.append(FForAll(("k",), _var_frame(sys, TVar("k"))))
    start.append(_others_frame(sys, i, vars_too=False))

    guard = _guard_formula(sys, t.guard, inspectee, i)
    fail = FAnd((FNot(guard), FPred(_loc(t.target_fail, True), i)))
    advance = conj([
        guard,
        FNot(FEq(inspectee, LAST)),
        FPred(_loc(t.name, True), i),
        FEq(TApp(f_t_p, i), TSucc(inspectee)),
    ])
    succeed = conj([guard, FEq(inspectee, LAST),
                    FPred(_loc(t.target_succ, True), i)])
    mid = [FPred(_loc(t.name, False), i), FOr((fail, advance, succeed))]
    if t.capture is not None:
        cap = t.capture
        cond = _guard_formula(sys, cap.condition, inspectee, i)
        taken = TApp(_func(cap.pointer, True), ZERO)
        kept = TApp(_func(cap.pointer, False), ZERO)
        mid.append(FImplies(cond, FEq(taken, inspectee)))
        mid.append(FImplies(FNot(cond), FEq(taken, kept)))
        mid.extend(_pointer_frames(sys, skip=cap.pointer))
    else:
        mid.extend(_pointer_frames(sys))
    mid.append(FForAll(("k",), _var_frame(sys, TVar("k"))))
    mid.append(_others_frame(sys, i, vars_too=False))

    return FExists(("i",), FOr((conj(start), conj(mid))))


def build_tau(sys: ParamSystem, label: str):
    """The step relation of one transition between the unprimed and primed
    configuration, exact on canonical pair structures."""
    for t in sys.loop_transitions:
        if t.name == label:
            return _tau_loop(sys, t)
    for idx, t in enumerate(sys.local_transitions):
        if local_label(idx, t) == label:
            return _tau_local(sys, t)
    raise ModelError(f"no transition labelled {label!r}")


# ---------------------------------------------------------------------------
# trap language formulas


def _letter_atoms(sys: ParamSystem, lang: TrapLanguage, letter, pos, primed: bool):
    atoms = []
    for slot, entry in zip(lang.slots, letter.entries):
        if isinstance(slot, tuple):
            name, t = slot
            executing = FAnd((
                FPred(_loc(t, primed), TVar(name)),
                FEq(TApp(_func(t, primed), TVar(name)), pos),
            ))
            if ARROW in entry:
                atoms.append(executing)
            if BLANK in entry:
                atoms.append(FNot(executing))
        elif slot == "loc":
            atoms.extend(FPred(_loc(q, primed), pos) for q in sorted(entry))
        elif any(p.name == slot for p in sys.pointers):
            pointing = FEq(TApp(_func(slot, primed), ZERO), pos)
            if ARROW in entry:
                atoms.append(pointing)
            if BLANK in entry:
                atoms.append(FNot(pointing))
        else:
            atoms.extend(FPred(_xvar(slot, v, primed), pos) for v in sorted(entry))
    return disj(atoms)


def build_phi(sys: ParamSystem, lang: TrapLanguage, primed: bool = False):
    """The configuration meets every word of the language of its size.

    Quantifies over the positions of all non-star letters; each admissible
    placement corresponds to one word, and the matrix demands a meeting
    cell in some region of that word.
    """
    validate_language(sys, lang)
    tokens = lang.tokens
    letter_ids = [idx for idx, tok in enumerate(tokens) if not tok.star]
    var_names = []
    for a, idx in enumerate(letter_ids):
        index = tokens[idx].letter.index
        var_names.append(index if index is not None else f"q{a}")
    var_of = {idx: TVar(name) for idx, name in zip(letter_ids, var_names)}

    constraints = []
    for (ia, ib) in zip(letter_ids, letter_ids[1:]):
        va, vb = var_of[ia], var_of[ib]
        if ib == ia + 1:
            between = FExists(("y",), FAnd((flt(va, TVar("y")),
                                            flt(TVar("y"), vb))))
            constraints.append(FAnd((flt(va, vb), FNot(between))))
        else:
            constraints.append(flt(va, vb))
    if letter_ids:
        if letter_ids[0] == 0:
            constraints.append(FEq(var_of[letter_ids[0]], ZERO))
        if letter_ids[-1] == len(tokens) - 1:
            constraints.append(FEq(var_of[letter_ids[-1]], LAST))

    regions = []
    for idx, tok in enumerate(tokens):
        if not tok.star:
            regions.append(_letter_atoms(sys, lang, tok.letter, var_of[idx], primed))
            continue
        atoms = _letter_atoms(sys, lang, tok.letter, TVar("y"), primed)
        bounds = []
        if idx > 0:
            bounds.append(flt(var_of[idx - 1], TVar("y")))
        if idx + 1 < len(tokens):
            bounds.append(flt(TVar("y"), var_of[idx + 1]))
        regions.append(FExists(("y",), conj(bounds + [atoms])))

    matrix = FImplies(conj(constraints), disj(regions))
    if not var_names:
        return disj(regions)
    return FForAll(tuple(var_names), matrix)


# ---------------------------------------------------------------------------
# problems, TPTP emission, prover


@dataclass
class FOProblem:
    name: str
    axioms: list
    conjecture: tuple


def inductivity_problems(sys: ParamSystem, languages, prop,
                         assume_property: bool = True,
                         size_floor: int | None = None) -> list:
    """One entailment per transition (step preserves the property under the
    language assumptions) plus one for the initial configuration."""
    problems = []
    base = [("eta", build_eta(sys)), ("eta_p", build_eta(sys, True))]
    base += list(psi_axioms())
    for k, lang in enumerate(languages, start=1):
        base.append((f"phi_{k}", build_phi(sys, lang)))
    if assume_property:
        base.append(("prop_pre", build_property(sys, prop)))
    if size_floor is not None:
        base.append(("size_floor", size_floor_formula(size_floor)))
    for label in sys.transition_labels():
        axioms = base + [(f"tau_{label}", build_tau(sys, label))]
        problems.append(FOProblem(
            f"{sys.name}_{label}", axioms,
            ("prop_post", build_property(sys, prop, primed=True)),
        ))
    init_axioms = [("eta", build_eta(sys))] + list(psi_axioms())
    init_axioms.append(("init", build_initial(sys)))
    if size_floor is not None:
        init_axioms.append(("size_floor", size_floor_formula(size_floor)))
    problems.append(FOProblem(
        f"{sys.name}_initial", init_axioms,
        ("prop", build_property(sys, prop)),
    ))
    return problems


def _render_term(term) -> str:
    if isinstance(term, TVar):
        return term.name.upper()
    if isinstance(term, TConst):
        return term.name
    if isinstance(term, TSucc):
        return f"succ({_render_term(term.arg)})"
    if isinstance(term, TApp):
        return f"{term.func}({_render_term(term.arg)})"
    raise ModelError(f"not a term: {term!r}")


def _render(f) -> str:
    if isinstance(f, FTrue):
        return "$true"
    if isinstance(f, FFalse):
        return "$false"
    if isinstance(f, FPred):
        return f"{f.name}({_render_term(f.arg)})"
    if isinstance(f, FEq):
        return f"{_render_term(f.left)} = {_render_term(f.right)}"
    if isinstance(f, FLe):
        return f"leq({_render_term(f.left)},{_render_term(f.right)})"
    if isinstance(f, FNot):
        if isinstance(f.inner, FEq):
            return (f"{_render_term(f.inner.left)} != "
                    f"{_render_term(f.inner.right)}")
        return f"~({_render(f.inner)})"
    if isinstance(f, FAnd):
        return "(" + " & ".join(_render(i) for i in f.items) + ")"
    if isinstance(f, FOr):
        return "(" + " | ".join(_render(i) for i in f.items) + ")"
    if isinstance(f, FImplies):
        return f"({_render(f.left)} => {_render(f.right)})"
    if isinstance(f, FIff):
        return f"({_render(f.left)} <=> {_render(f.right)})"
    if isinstance(f, (FForAll, FExists)):
        mark = "!" if isinstance(f, FForAll) else "?"
        names = ",".join(name.upper() for name in f.names)
        return f"{mark} [{names}] : ({_render(f.body)})"
    raise ModelError(f"not a formula: {f!r}")


def emit_tptp(problem: FOProblem) -> str:
    lines = [f"% problem: {problem.name}", ""]
    for name, formula in problem.axioms:
        lines.append(f"fof({name}, axiom, {_render(formula)}).")
    name, formula = problem.conjecture
    lines.append(f"fof({name}, conjecture, {_render(formula)}).")
    lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# a small TPTP reader, enough to re-check emitted files


_TPTP_TOKEN = re.compile(
    r"<=>|=>|!=|\$?[A-Za-z_][A-Za-z0-9_]*|[()\[\],.:&|~!?=]"
)


def _tptp_tokens(text: str):
    out = []
    for line in text.splitlines():
        stripped = line.split("%", 1)[0]
        out.extend(_TPTP_TOKEN.findall(stripped))
    return out


class _TptpParser:
    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ModelError("unexpected end of TPTP input")
        self.pos += 1
        return tok

    def expect(self, tok):
        got = self.next()
        if got != tok:
            raise ModelError(f"expected {tok!r}, got {got!r}")

    def formulas(self):
        out = []
        while self.peek() is not None:
            self.expect("fof")
            self.expect("(")
            name = self.next()
            self.expect(",")
            role = self.next()
            self.expect(",")
            formula = self.formula()
            self.expect(")")
            self.expect(".")
            out.append((name, role, formula))
        return out

    def formula(self):
        left = self.unary()
        op = self.peek()
        if op not in ("&", "|", "=>", "<=>"):
            return left
        if op in ("&", "|"):
            items = [left]
            while self.peek() == op:
                self.next()
                items.append(self.unary())
            return FAnd(tuple(items)) if op == "&" else FOr(tuple(items))
        self.next()
        right = self.unary()
        return FImplies(left, right) if op == "=>" else FIff(left, right)

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.next()
            return FNot(self.unary())
        if tok in ("!", "?"):
            self.next()
            self.expect("[")
            names = [self.next().lower()]
            while self.peek() == ",":
                self.next()
                names.append(self.next().lower())
            self.expect("]")
            self.expect(":")
            body = self.unary()
            ctor = FForAll if tok == "!" else FExists
            return ctor(tuple(names), body)
        if tok == "(":
            self.next()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok == "$true":
            self.next()
            return TRUE
        if tok == "$false":
            self.next()
            return FALSE
        return self.atom()

    def atom(self):
        name = self.next()
        args = []
        if self.peek() == "(":
            self.next()
            args.append(self.term())
            while self.peek() == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
        if self.peek() in ("=", "!="):
            op = self.next()
            left = self._as_term(name, args)
            right = self.term()
            eq = FEq(left, right)
            return FNot(eq) if op == "!=" else eq
        if name == "leq":
            if len(args) != 2:
                raise ModelError("leq takes two arguments")
            return FLe(args[0], args[1])
        if len(args) != 1:
            raise ModelError(f"predicate {name} must be monadic")
        return FPred(name, args[0])

    def term(self):
        name = self.next()
        if self.peek() == "(":
            self.next()
            arg = self.term()
            self.expect(")")
            return self._as_term(name, [arg])
        return self._as_term(name, [])

    @staticmethod
    def _as_term(name, args):
        if not args:
            if name in ("zero", "last"):
                return TConst(name)
            if name[0].isupper():
                return TVar(name.lower())
            raise ModelError(f"unknown constant term {name!r}")
        if len(args) != 1:
            raise ModelError(f"function {name} must be monadic")
        if name == "succ":
            return TSucc(args[0])
        return TApp(name, args[0])


def parse_tptp(text: str):
    """Parse fof lines back into (name, role, formula) triples."""
    return _TptpParser(_tptp_tokens(text)).formulas()


# ---------------------------------------------------------------------------
# running a prover


@dataclass
class ProverResult:
    status: str  # Theorem | CounterSatisfiable | Timeout | Unknown | Unavailable | Error
    seconds: float
    raw: str


_SZS = re.compile(r"SZS status\s+(\w+)")

_STATUS_MAP = {
    "Theorem": "Theorem",
    "Unsatisfiable": "Theorem",
    "ContradictoryAxioms": "Theorem",
    "CounterSatisfiable": "CounterSatisfiable",
    "Satisfiable": "CounterSatisfiable",
    "Timeout": "Timeout",
    "ResourceOut": "Timeout",
    "GaveUp": "Unknown",
    "Unknown": "Unknown",
}

_KNOWN_PROVERS = ("eprover", "vampire")


def prover_command(explicit: str | None = None, timeout: int = 60):
    """Resolve the prover invocation: an explicit command string, the
    PARATRAP_PROVER environment variable, or the first known prover on
    PATH.  Returns an argv prefix (the problem file gets appended) or None.
    """
    configured = explicit or os.environ.get("PARATRAP_PROVER")
    if configured:
        return shlex.split(configured)
    for name in _KNOWN_PROVERS:
        path = shutil.which(name)
        if path is None:
            continue
        if name == "eprover":
            return [path, "--auto", "--silent", f"--cpu-limit={int(timeout)}"]
        return [path, "--mode", "casc", "-t", f"{int(timeout)}s"]
    return None


def run_prover(command, problem_path: str, timeout: int = 60) -> ProverResult:
    started = time.monotonic()
    try:
        proc = subprocess.run(
            list(command) + [problem_path],
            capture_output=True, text=True, timeout=timeout + 10,
        )
    except FileNotFoundError:
        return ProverResult("Unavailable", 0.0, "")
    except subprocess.TimeoutExpired as exc:
        raw = (exc.stdout or "") if isinstance(exc.stdout, str) else ""
        return ProverResult("Timeout", time.monotonic() - started, raw)
    elapsed = time.monotonic() - started
    raw = (proc.stdout or "") + (proc.stderr or "")
    match = _SZS.search(raw)
    if match:
        return ProverResult(_STATUS_MAP.get(match.group(1), "Unknown"),
                            elapsed, raw)
    if proc.returncode != 0:
        return ProverResult("Error", elapsed, raw)
    return ProverResult("Unknown", elapsed, raw)


@dataclass
class ProblemOutcome:
    name: str
    path: str
    status: str
    seconds: float


@dataclass
class InductivityReport:
    overall: str  # proved | not_proved | prover_unavailable
    problems: list

    def to_json(self) -> dict:
        return {
            "overall": self.overall,
            "problems": [
                {"name": p.name, "file": p.path, "status": p.status,
                 "seconds": round(p.seconds, 3)}
                for p in self.problems
            ],
        }


def check_inductivity(sys: ParamSystem, languages, prop, out_dir: str,
                      prover=None, timeout: int = 60,
                      assume_property: bool = True,
                      size_floor: int | None = None) -> InductivityReport:
    """Emit one TPTP problem per transition plus the initial one, run the
    prover on each if available, and summarize."""
    os.makedirs(out_dir, exist_ok=True)
    problems = inductivity_problems(sys, languages, prop,
                                    assume_property, size_floor)
    outcomes = []
    for problem in problems:
        path = os.path.join(out_dir, f"{problem.name}.p")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(emit_tptp(problem))
        outcomes.append(ProblemOutcome(problem.name, path, "Unavailable", 0.0))
    if prover is None:
        return InductivityReport("prover_unavailable", outcomes)
    for outcome in outcomes:
        result = run_prover(prover, outcome.path, timeout)
        outcome.status = result.status
        outcome.seconds = result.seconds
        if result.status == "Unavailable":
            return InductivityReport("prover_unavailable", outcomes)
    overall = ("proved" if all(o.status == "Theorem" for o in outcomes)
               else "not_proved")
    return InductivityReport(overall, outcomes)
