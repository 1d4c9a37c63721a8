"""Explicit-state semantics over slotted words.

A configuration of an N-agent instance is a word of N letters.  Every letter
carries the agent's location (a control state, or the name of the loop
transition it is currently iterating), one value per declared variable, and
one mark slot per (agent, loop transition) pair plus one per global pointer.
A mark ``(i, t)`` sitting on letter j means: agent i is iterating t and will
inspect agent j next.  A pointer mark sits on the letter the pointer
designates.

Atomic steps are enumerated as *occurrences*: a kind, the acting agents, the
set of cells the step consumes (``changed_pre``), the set it produces
(``changed_post``) and the cells it reads but leaves alone (``guard_cells``).
A cell is an ``(agent, slot, value)`` triple.  This cell-level view is shared
with the SAT encodings; the step relation itself is recovered by
``apply_occurrence`` on enabled occurrences.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

from .model import (
    ModelError,
    ParamSystem,
    Property,
    eval_guard,
    eval_property,
    guard_vars,
    local_label,
)

ARROW = "↑"
BLANK = "␣"

# slot identifiers: "loc", a variable name, (inspector, loop name), or a
# pointer name
SlotId = "str | tuple[int, str]"
Cell = "tuple[int, SlotId, str]"


@dataclass(frozen=True)
class Letter:
    loc: str
    vals: tuple[str, ...]
    marks: frozenset = frozenset()

    def with_loc(self, loc: str) -> "Letter":
        return Letter(loc, self.vals, self.marks)


Config = "tuple[Letter, ...]"


def slot_ids(sys: ParamSystem, n: int) -> list:
    out = ["loc"]
    out.extend(v.name for v in sys.variables)
    for i in range(n):
        out.extend((i, t.name) for t in sys.loop_transitions)
    out.extend(p.name for p in sys.pointers)
    return out


def slot_values(sys: ParamSystem, slot) -> tuple[str, ...]:
    if slot == "loc":
        return sys.loc_values()
    if isinstance(slot, str) and any(v.name == slot for v in sys.variables):
        return sys.variable(slot).values
    return (ARROW, BLANK)


def slot_sort_key(slot):
    if slot == "loc":
        return (0, "", 0)
    if isinstance(slot, tuple):
        return (2, slot[1], slot[0])
    return (1, slot, 0)


@lru_cache(maxsize=None)
def _slot_kinds(sys: ParamSystem) -> dict:
    kinds: dict = {"loc": ("loc", 0)}
    for i, v in enumerate(sys.variables):
        kinds[v.name] = ("var", i)
    for p in sys.pointers:
        kinds[p.name] = ("ptr", 0)
    return kinds


def letter_value(sys: ParamSystem, config, agent: int, slot) -> str:
    letter = config[agent]
    if isinstance(slot, tuple):
        return ARROW if slot in letter.marks else BLANK
    kind, idx = _slot_kinds(sys)[slot]
    if kind == "loc":
        return letter.loc
    if kind == "ptr":
        return ARROW if slot in letter.marks else BLANK
    return letter.vals[idx]


def cells_of(sys: ParamSystem, config) -> frozenset:
    """All (agent, slot, value) cells a configuration occupies."""
    n = len(config)
    slots = slot_ids(sys, n)
    return frozenset(
        (j, s, letter_value(sys, config, j, s)) for j in range(n) for s in slots
    )


def initial_config(sys: ParamSystem, n: int):
    """All agents at the initial state with initial values, no iteration in
    progress; every global pointer designates agent 0."""
    if n < 1:
        raise ModelError("instance size must be at least 1")
    vals = sys.initial_valuation()
    letters = [Letter(sys.initial_state, vals) for _ in range(n)]
    if sys.pointers:
        letters[0] = Letter(
            sys.initial_state, vals, frozenset(p.name for p in sys.pointers)
        )
    return tuple(letters)


def validate_config(sys: ParamSystem, config) -> None:
    """Check the structural well-formedness conditions; raises ModelError."""
    n = len(config)
    if n < 1:
        raise ModelError("empty configuration")
    loc_alphabet = set(sys.loc_values())
    loop_names = {t.name for t in sys.loop_transitions}
    ptr_names = {p.name for p in sys.pointers}
    for j, letter in enumerate(config):
        if letter.loc not in loc_alphabet:
            raise ModelError(f"letter {j}: unknown location {letter.loc!r}")
        if len(letter.vals) != len(sys.variables):
            raise ModelError(f"letter {j}: wrong number of variable values")
        for v, val in zip(sys.variables, letter.vals):
            if val not in v.values:
                raise ModelError(f"letter {j}: {v.name} = {val!r} outside range")
        for key in letter.marks:
            if isinstance(key, tuple):
                i, t = key
                if not (0 <= i < n) or t not in loop_names:
                    raise ModelError(f"letter {j}: stray mark {key!r}")
            elif key not in ptr_names:
                raise ModelError(f"letter {j}: stray mark {key!r}")
    for i in range(n):
        for t in loop_names:
            count = sum(1 for letter in config if (i, t) in letter.marks)
            if config[i].loc == t and count != 1:
                raise ModelError(
                    f"agent {i} iterates {t} but has {count} position marks"
                )
            if config[i].loc != t and count != 0:
                raise ModelError(f"agent {i} is not iterating {t} but marks exist")
    for p in ptr_names:
        count = sum(1 for letter in config if p in letter.marks)
        if count != 1:
            raise ModelError(f"pointer {p} designates {count} agents, wants 1")


def is_valid_config(sys: ParamSystem, config) -> bool:
    try:
        validate_config(sys, config)
        return True
    except ModelError:
        return False


def mark_position(config, key) -> int | None:
    for j, letter in enumerate(config):
        if key in letter.marks:
            return j
    return None


# ---------------------------------------------------------------------------
# occurrences


@dataclass(frozen=True)
class Occurrence:
    """One atomic step shape at a fixed instance size.

    ``changed_pre`` cells are consumed, ``changed_post`` cells produced (over
    the same agent/slot pairs), ``guard_cells`` must hold and stay.  The step
    is enabled in a configuration iff all pre and guard cells hold.
    """

    kind: str  # local | loop_start | loop_advance | loop_fail | loop_succeed
    transition: str
    agent: int
    inspectee: int | None
    changed_pre: frozenset
    changed_post: frozenset
    guard_cells: frozenset

    def anchor(self):
        """The (agent, location) cell that must hold for this occurrence."""
        for agent, slot, value in itertools.chain(self.changed_pre, self.guard_cells):
            if slot == "loc" and agent == self.agent:
                return (agent, value)
        raise AssertionError("occurrence without a location anchor")

    def describe(self) -> str:
        extra = "" if self.inspectee is None else f" inspecting {self.inspectee}"
        return f"{self.kind} {self.transition} by agent {self.agent}{extra}"


def _valuations(sys: ParamSystem, names):
    """All total valuations over the given variable names, sorted order."""
    names = sorted(names)
    ranges = [sys.variable(v).values for v in names]
    for combo in itertools.product(*ranges):
        yield tuple(zip(names, combo))


@lru_cache(maxsize=None)
def enumerate_occurrences(sys: ParamSystem, n: int) -> tuple:
    """Every occurrence of the size-n instance, in deterministic order."""
    out = []
    for idx, t in enumerate(sys.local_transitions):
        label = local_label(idx, t)
        assigned = [v for v, _ in t.assignments]
        for agent in range(n):
            for old in _valuations(sys, assigned):
                pre = {(agent, "loc", t.origin)}
                post = {(agent, "loc", t.target)}
                for (var, oldval), (_, newval) in zip(old, sorted(t.assignments)):
                    pre.add((agent, var, oldval))
                    post.add((agent, var, newval))
                base_guard = set()
                guard_positions = [None]
                if t.pointer_guard is not None:
                    guard_positions = list(range(n))
                effect_positions = [None]
                if t.sets_pointer is not None:
                    effect_positions = list(range(n))
                for d in guard_positions:
                    guard = set(base_guard)
                    if d is not None:
                        pg = t.pointer_guard
                        guard.add((d, pg.pointer, ARROW))
                        guard.add((d, pg.var, pg.value))
                    if t.sets_pointer is not None and t.pointer_guard is not None \
                            and t.sets_pointer == t.pointer_guard.pointer:
                        positions = [d]
                    else:
                        positions = effect_positions
                    for e in positions:
                        pre2, post2, guard2 = set(pre), set(post), set(guard)
                        if e is not None:
                            p = t.sets_pointer
                            if e == agent:
                                guard2.add((agent, p, ARROW))
                            else:
                                pre2.add((e, p, ARROW))
                                pre2.add((agent, p, BLANK))
                                post2.add((e, p, BLANK))
                                post2.add((agent, p, ARROW))
                        out.append(Occurrence(
                            "local", label, agent, None,
                            frozenset(pre2), frozenset(post2), frozenset(guard2),
                        ))
    for t in sys.loop_transitions:
        for agent in range(n):
            pre = frozenset({(agent, "loc", t.origin), (0, (agent, t.name), BLANK)})
            post = frozenset({(agent, "loc", t.name), (0, (agent, t.name), ARROW)})
            out.append(Occurrence(
                "loop_start", t.name, agent, None, pre, post, frozenset()))
    for t in sys.loop_transitions:
        needed = guard_vars(t.guard)
        if t.capture is not None:
            needed = needed | guard_vars(t.capture.condition)
        for agent in range(n):
            for j in range(n):
                for valuation in _valuations(sys, needed):
                    env = dict(valuation)
                    passes = eval_guard(t.guard, env, agent == j)
                    val_cells = {(j, var, val) for var, val in valuation}
                    mark = (agent, t.name)
                    if not passes:
                        kind = "loop_fail"
                        pre = {(agent, "loc", t.name), (j, mark, ARROW)}
                        post = {(agent, "loc", t.target_fail), (j, mark, BLANK)}
                        guard = set(val_cells)
                    elif j < n - 1:
                        kind = "loop_advance"
                        pre = {(j, mark, ARROW), (j + 1, mark, BLANK)}
                        post = {(j, mark, BLANK), (j + 1, mark, ARROW)}
                        guard = val_cells | {(agent, "loc", t.name)}
                    else:
                        kind = "loop_succeed"
                        pre = {(agent, "loc", t.name), (j, mark, ARROW)}
                        post = {(agent, "loc", t.target_succ), (j, mark, BLANK)}
                        guard = set(val_cells)
                    captured = t.capture is not None and eval_guard(
                        t.capture.condition, env, agent == j)
                    if not captured:
                        out.append(Occurrence(
                            kind, t.name, agent, j,
                            frozenset(pre), frozenset(post), frozenset(guard)))
                        continue
                    p = t.capture.pointer
                    for d in range(n):
                        pre2, post2, guard2 = set(pre), set(post), set(guard)
                        if d == j:
                            guard2.add((j, p, ARROW))
                        else:
                            pre2.add((d, p, ARROW))
                            pre2.add((j, p, BLANK))
                            post2.add((d, p, BLANK))
                            post2.add((j, p, ARROW))
                        out.append(Occurrence(
                            kind, t.name, agent, j,
                            frozenset(pre2), frozenset(post2), frozenset(guard2)))
    return tuple(out)


def is_enabled(sys: ParamSystem, config, occ: Occurrence) -> bool:
    for agent, slot, value in occ.changed_pre:
        if letter_value(sys, config, agent, slot) != value:
            return False
    for agent, slot, value in occ.guard_cells:
        if letter_value(sys, config, agent, slot) != value:
            return False
    return True


def apply_occurrence(sys: ParamSystem, config, occ: Occurrence):
    """Successor configuration; the occurrence must be enabled."""
    if not is_enabled(sys, config, occ):
        raise ModelError(f"occurrence not enabled: {occ.describe()}")
    kinds = _slot_kinds(sys)
    letters = list(config)
    for agent, slot, value in occ.changed_post:
        letter = letters[agent]
        kind, idx = ("mark", 0) if isinstance(slot, tuple) else kinds[slot]
        if kind == "loc":
            letters[agent] = Letter(value, letter.vals, letter.marks)
        elif kind == "var":
            vals = list(letter.vals)
            vals[idx] = value
            letters[agent] = Letter(letter.loc, tuple(vals), letter.marks)
        else:
            marks = set(letter.marks)
            if value == ARROW:
                marks.add(slot)
            else:
                marks.discard(slot)
            letters[agent] = Letter(letter.loc, letter.vals, frozenset(marks))
    return tuple(letters)


@lru_cache(maxsize=None)
def _occurrence_index(sys: ParamSystem, n: int):
    index: dict = {}
    for occ in enumerate_occurrences(sys, n):
        index.setdefault(occ.anchor(), []).append(occ)
    return index


def successors(sys: ParamSystem, config) -> list:
    """All (occurrence, successor) pairs of one configuration."""
    n = len(config)
    index = _occurrence_index(sys, n)
    out = []
    for agent, letter in enumerate(config):
        for occ in index.get((agent, letter.loc), ()):
            if is_enabled(sys, config, occ):
                out.append((occ, apply_occurrence(sys, config, occ)))
    return out


# ---------------------------------------------------------------------------
# exploration


@dataclass
class ReachResult:
    configs: list
    truncated: bool

    @property
    def count(self) -> int:
        return len(self.configs)


def reachable(sys: ParamSystem, n: int, bound: int | None = None) -> ReachResult:
    """Breadth-first reachable set from the initial configuration.

    ``bound`` caps the number of configurations explored; hitting the cap is
    reported as truncation, never silently.
    """
    start = initial_config(sys, n)
    seen = {start}
    order = [start]
    queue = [start]
    truncated = False
    while queue:
        if bound is not None and len(order) >= bound:
            truncated = True
            break
        next_queue = []
        for config in queue:
            for _, succ in successors(sys, config):
                if succ not in seen:
                    seen.add(succ)
                    order.append(succ)
                    next_queue.append(succ)
                    if bound is not None and len(order) >= bound:
                        truncated = True
                        break
            if truncated:
                break
        if truncated:
            break
        queue = next_queue
    return ReachResult(order, truncated)


def eval_property_config(sys: ParamSystem, config, prop: Property) -> bool:
    def count_state(q):
        return sum(1 for letter in config if letter.loc == q)

    def count_var(var, val):
        idx = sys.var_index(var)
        return sum(1 for letter in config if letter.vals[idx] == val)

    return eval_property(prop, count_state, count_var)


@dataclass
class Trace:
    """A ⊢-chain: configs[k] steps to configs[k+1] via occurrences[k]."""

    configs: list
    occurrences: list


@dataclass
class PropertyCheckResult:
    verdict: str  # "holds" | "violated" | "unknown_truncated"
    violation: Trace | None
    explored: int
    truncated: bool


def check_property_explicit(
    sys: ParamSystem, n: int, prop: Property, bound: int | None = None
) -> PropertyCheckResult:
    """Search the reachable space for a property violation.

    Returns a shortest violating run when one exists within the bound.
    """
    start = initial_config(sys, n)
    parent: dict = {start: None}
    if not eval_property_config(sys, start, prop):
        return PropertyCheckResult("violated", Trace([start], []), 1, False)
    queue = [start]
    explored = 1
    truncated = False
    while queue:
        next_queue = []
        for config in queue:
            for occ, succ in successors(sys, config):
                if succ in parent:
                    continue
                parent[succ] = (config, occ)
                explored += 1
                if not eval_property_config(sys, succ, prop):
                    configs = [succ]
                    occs = []
                    cur = succ
                    while parent[cur] is not None:
                        prev, step = parent[cur]
                        configs.append(prev)
                        occs.append(step)
                        cur = prev
                    configs.reverse()
                    occs.reverse()
                    return PropertyCheckResult(
                        "violated", Trace(configs, occs), explored, truncated)
                if bound is not None and explored >= bound:
                    truncated = True
                    break
                next_queue.append(succ)
            if truncated:
                break
        if truncated:
            break
        queue = next_queue
    verdict = "unknown_truncated" if truncated else "holds"
    return PropertyCheckResult(verdict, None, explored, truncated)


def all_configs(sys: ParamSystem, n: int):
    """Enumerate every well-formed configuration of the size-n instance.

    Exponential; meant for small-instance oracles only.
    """
    loop_names = [t.name for t in sys.loop_transitions]
    value_ranges = [v.values for v in sys.variables]
    locs = list(sys.states) + loop_names
    per_agent = [
        (loc, vals)
        for loc in locs
        for vals in itertools.product(*value_ranges)
    ]
    for assignment in itertools.product(per_agent, repeat=n):
        iterating = [
            (i, t) for i, (loc, _) in enumerate(assignment) for t in loop_names
            if loc == t
        ]
        position_ranges = [range(n) for _ in iterating]
        for positions in itertools.product(*position_ranges):
            for ptr_positions in itertools.product(
                range(n), repeat=len(sys.pointers)
            ):
                marks: list[set] = [set() for _ in range(n)]
                for (i, t), j in zip(iterating, positions):
                    marks[j].add((i, t))
                for p, j in zip(sys.pointers, ptr_positions):
                    marks[j].add(p.name)
                yield tuple(
                    Letter(loc, vals, frozenset(marks[i]))
                    for i, (loc, vals) in enumerate(assignment)
                )


# ---------------------------------------------------------------------------
# rendering


def _mark_label(key) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}.{key[1]}"
    return key


def format_config(sys: ParamSystem, config) -> str:
    """Column-vector table: one column per agent, one row per slot."""
    n = len(config)
    rows = [("loc", [letter.loc for letter in config])]
    for v in sys.variables:
        idx = sys.var_index(v.name)
        rows.append((v.name, [letter.vals[idx] for letter in config]))
    for i in range(n):
        for t in sys.loop_transitions:
            key = (i, t.name)
            rows.append((
                _mark_label(key),
                [ARROW if key in letter.marks else BLANK for letter in config],
            ))
    for p in sys.pointers:
        rows.append((
            p.name,
            [ARROW if p.name in letter.marks else BLANK for letter in config],
        ))
    label_w = max(len(label) for label, _ in rows)
    col_w = [
        max(len(rows[r][1][j]) for r in range(len(rows))) for j in range(n)
    ]
    header = " " * label_w + "  " + "  ".join(
        str(j).rjust(col_w[j]) for j in range(n))
    lines = [header]
    for label, entries in rows:
        lines.append(
            label.rjust(label_w) + "  "
            + "  ".join(e.rjust(col_w[j]) for j, e in enumerate(entries))
        )
    return "\n".join(lines)


def config_to_json(sys: ParamSystem, config) -> dict:
    return {
        "letters": [
            {
                "loc": letter.loc,
                "vars": {v.name: letter.vals[i] for i, v in enumerate(sys.variables)},
                "marks": sorted(_mark_label(k) for k in letter.marks),
            }
            for letter in config
        ]
    }


def occurrence_to_json(occ: Occurrence) -> dict:
    return {
        "kind": occ.kind,
        "transition": occ.transition,
        "agent": occ.agent,
        "inspectee": occ.inspectee,
    }


def format_trace(sys: ParamSystem, trace: Trace) -> str:
    parts = []
    for k, config in enumerate(trace.configs):
        parts.append(f"step {k}:")
        parts.append(format_config(sys, config))
        if k < len(trace.occurrences):
            parts.append(f"  |- {trace.occurrences[k].describe()}")
    return "\n".join(parts)


def trace_to_json(sys: ParamSystem, trace: Trace) -> str:
    return json.dumps(
        {
            "configs": [config_to_json(sys, c) for c in trace.configs],
            "steps": [occurrence_to_json(o) for o in trace.occurrences],
        },
        indent=2,
        ensure_ascii=False,
    )
