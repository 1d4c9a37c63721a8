"""Trap invariants over slotted words, with a SAT-backed refinement loop.

A powerword assigns to every cell position (agent, slot) a *set* of values.
A configuration meets a powerword if it agrees with it in at least one cell.
A powerword is a trap if the initial configuration meets it and every step
from a meeting configuration leads to a meeting configuration; such traps
survive forever and rule out configurations that miss them.

The structural trap condition checked here is per occurrence: whenever a
step can consume a cell of the powerword, it must produce or keep one.  It
is sufficient for the semantic trap property and is exactly what the CNF
encoding expresses, so SAT models decode to structural traps and vice
versa.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sat
from .model import ModelError, ParamSystem, Property
from .semantics import (
    ARROW,
    all_configs,
    apply_occurrence,
    cells_of,
    enumerate_occurrences,
    eval_property_config,
    initial_config,
    is_enabled,
    letter_value,
    slot_ids,
    slot_sort_key,
    slot_values,
    successors,
)


@dataclass(frozen=True)
class Powerword:
    """Sets of values per (agent, slot), stored as the set of present cells."""

    n: int
    cells: frozenset

    def entry(self, agent: int, slot) -> frozenset:
        return frozenset(v for (j, s, v) in self.cells if j == agent and s == slot)

    def restrict(self, keep) -> "Powerword":
        return Powerword(self.n, frozenset(c for c in self.cells if c in keep))

    def __len__(self) -> int:
        return self.n


def validate_powerword(sys: ParamSystem, pw: Powerword) -> None:
    slots = set(slot_ids(sys, pw.n))
    for agent, slot, value in pw.cells:
        if not (0 <= agent < pw.n):
            raise ModelError(f"cell agent {agent} out of range")
        if slot not in slots:
            raise ModelError(f"cell refers to unknown slot {slot!r}")
        if value not in slot_values(sys, slot):
            raise ModelError(f"cell value {value!r} outside alphabet of {slot!r}")


def intersects(sys: ParamSystem, config, pw: Powerword) -> bool:
    """Does the configuration agree with the powerword in some cell?"""
    return any(
        letter_value(sys, config, agent, slot) == value
        for (agent, slot, value) in pw.cells
    )


def cell_sort_key(cell):
    agent, slot, value = cell
    return (agent, slot_sort_key(slot), value)


# ---------------------------------------------------------------------------
# structural trap condition


@dataclass(frozen=True)
class TrapConstraint:
    """Implication: if any of ``if_any`` is in the trap, some of ``then_any``
    must be too.  ``if_any`` empty means the consequent must hold outright."""

    if_any: tuple
    then_any: tuple
    origin: str

    def holds(self, cells) -> bool:
        if self.if_any and not any(c in cells for c in self.if_any):
            return True
        return any(c in cells for c in self.then_any)


@dataclass
class TrapCnf:
    """Cell variables plus one constraint per occurrence and one for the
    initial configuration."""

    sys: ParamSystem
    n: int
    var_of: dict
    cell_of: dict
    constraints: list

    def to_clauses(self) -> list:
        clauses = []
        for con in self.constraints:
            then_lits = [self.var_of[c] for c in con.then_any]
            if not con.if_any:
                clauses.append(then_lits)
            else:
                for c in con.if_any:
                    clauses.append([-self.var_of[c]] + then_lits)
        return clauses

    def to_dimacs(self, extra_clauses=()) -> str:
        comments = [f"trap encoding: {self.sys.name} n={self.n}"]
        for var in sorted(self.cell_of):
            agent, slot, value = self.cell_of[var]
            comments.append(f"var {var} = agent {agent}, slot {slot}, value {value}")
        clauses = self.to_clauses() + [list(c) for c in extra_clauses]
        return sat.to_dimacs(len(self.var_of), clauses, comments)

    def decode(self, model) -> Powerword:
        cells = frozenset(
            cell for var, cell in self.cell_of.items() if model.get(var, False)
        )
        return Powerword(self.n, cells)


def _cell_universe(sys: ParamSystem, n: int) -> list:
    cells = []
    for agent in range(n):
        for slot in sorted(slot_ids(sys, n), key=slot_sort_key):
            for value in slot_values(sys, slot):
                cells.append((agent, slot, value))
    return cells


def trap_constraints(sys: ParamSystem, n: int) -> list:
    out = [
        TrapConstraint(
            (), tuple(sorted(cells_of(sys, initial_config(sys, n)), key=cell_sort_key)),
            "initial",
        )
    ]
    for occ in enumerate_occurrences(sys, n):
        consequent = sorted(occ.changed_post | occ.guard_cells, key=cell_sort_key)
        out.append(TrapConstraint(
            tuple(sorted(occ.changed_pre, key=cell_sort_key)),
            tuple(consequent),
            occ.describe(),
        ))
    return out


def encode_trap_constraints(sys: ParamSystem, n: int) -> TrapCnf:
    var_of = {}
    cell_of = {}
    for i, cell in enumerate(_cell_universe(sys, n), start=1):
        var_of[cell] = i
        cell_of[i] = cell
    return TrapCnf(sys, n, var_of, cell_of, trap_constraints(sys, n))


def is_trap_structural(sys: ParamSystem, pw: Powerword, explain: bool = False):
    """Sufficient trap check: initial intersection plus per-occurrence
    preservation.  With ``explain`` returns (bool, violated-constraint|None)."""
    validate_powerword(sys, pw)
    for con in trap_constraints(sys, pw.n):
        if not con.holds(pw.cells):
            return (False, con) if explain else False
    return (True, None) if explain else True


def is_trap_exact(
    sys: ParamSystem, pw: Powerword, max_configs: int = 500_000
) -> bool:
    """Literal trap check by enumerating every configuration and step.

    Exponential in the instance size; refuses to run past ``max_configs``.
    """
    validate_powerword(sys, pw)
    if not intersects(sys, initial_config(sys, pw.n), pw):
        return False
    count = 0
    for config in all_configs(sys, pw.n):
        count += 1
        if count > max_configs:
            raise ModelError(
                f"exact trap check needs more than {max_configs} configurations"
            )
        if not intersects(sys, config, pw):
            continue
        for _, succ in successors(sys, config):
            if not intersects(sys, succ, pw):
                return False
    return True


# ---------------------------------------------------------------------------
# counterexample search


def _add_config_vars(builder: sat.CnfBuilder, sys, n: int, tag: str) -> dict:
    var_of = {}
    for cell in _cell_universe(sys, n):
        var_of[cell] = builder.new_var((tag, cell))
    return var_of


def _add_wellformedness(builder: sat.CnfBuilder, sys, n: int, var_of) -> None:
    for agent in range(n):
        for slot in slot_ids(sys, n):
            builder.add_exactly_one(
                [var_of[(agent, slot, v)] for v in slot_values(sys, slot)]
            )
    for i in range(n):
        for t in sys.loop_transitions:
            executing = var_of[(i, "loc", t.name)]
            arrows = [var_of[(j, (i, t.name), ARROW)] for j in range(n)]
            for a in arrows:
                builder.add_clause([executing, -a])
            builder.add_clause([-executing] + arrows)
            builder.add_at_most_one(arrows)
    for p in sys.pointers:
        builder.add_exactly_one(
            [var_of[(j, p.name, ARROW)] for j in range(n)]
        )


def _encode_property(builder: sat.CnfBuilder, sys, n: int, prop, var_of) -> int:
    from .model import AtLeastState, AtLeastVar, PropAnd, PropNot, PropOr

    if isinstance(prop, AtLeastState):
        lits = [var_of[(j, "loc", prop.state)] for j in range(n)]
        return builder.at_least_gate(lits, prop.count)
    if isinstance(prop, AtLeastVar):
        lits = [var_of[(j, prop.var, prop.value)] for j in range(n)]
        return builder.at_least_gate(lits, prop.count)
    if isinstance(prop, PropNot):
        return -_encode_property(builder, sys, n, prop.inner, var_of)
    if isinstance(prop, PropAnd):
        return builder.and_gate(
            [_encode_property(builder, sys, n, i, var_of) for i in prop.items]
        )
    if isinstance(prop, PropOr):
        return builder.or_gate(
            [_encode_property(builder, sys, n, i, var_of) for i in prop.items]
        )
    raise ModelError(f"unknown property node {prop!r}")


def _decode_config(sys, n: int, var_of, model):
    from .semantics import Letter

    letters = []
    for agent in range(n):
        loc = None
        for v in slot_values(sys, "loc"):
            if model[var_of[(agent, "loc", v)]]:
                loc = v
        vals = []
        for var in sys.variables:
            for v in var.values:
                if model[var_of[(agent, var.name, v)]]:
                    vals.append(v)
                    break
        marks = set()
        for slot in slot_ids(sys, n):
            if isinstance(slot, tuple) or any(p.name == slot for p in sys.pointers):
                if model[var_of[(agent, slot, ARROW)]]:
                    marks.add(slot)
        letters.append(Letter(loc, tuple(vals), frozenset(marks)))
    return tuple(letters)


def find_counterexample(
    sys: ParamSystem,
    n: int,
    traps,
    prop: Property,
    assume_property: bool = True,
    dump_dimacs=None,
):
    """Search for a step (C, occurrence, C') with C meeting every given trap,
    C' violating the property, and (by default) C still satisfying it.

    Returns the triple or None.  The search ranges over all well-formed
    configurations, not only reachable ones.
    """
    builder = sat.CnfBuilder()
    pre_vars = _add_config_vars(builder, sys, n, "pre")
    post_vars = _add_config_vars(builder, sys, n, "post")
    _add_wellformedness(builder, sys, n, pre_vars)
    _add_wellformedness(builder, sys, n, post_vars)

    occurrences = enumerate_occurrences(sys, n)
    all_cells = _cell_universe(sys, n)
    selectors = []
    for occ in occurrences:
        s = builder.new_var(("step", occ))
        selectors.append(s)
        for cell in occ.changed_pre | occ.guard_cells:
            builder.add_clause([-s, pre_vars[cell]])
        for cell in occ.changed_post:
            builder.add_clause([-s, post_vars[cell]])
        changed_pairs = {(c[0], c[1]) for c in occ.changed_pre}
        for cell in all_cells:
            if (cell[0], cell[1]) in changed_pairs:
                continue
            builder.add_clause([-s, -pre_vars[cell], post_vars[cell]])
    builder.add_clause(selectors)

    for pw in traps:
        if pw.n != n:
            raise ModelError("trap instance size mismatch")
        builder.add_clause([pre_vars[cell] for cell in sorted(pw.cells, key=cell_sort_key)])

    prop_pre = _encode_property(builder, sys, n, prop, pre_vars)
    prop_post = _encode_property(builder, sys, n, prop, post_vars)
    if assume_property:
        builder.add_clause([prop_pre])
    builder.add_clause([-prop_post])

    if dump_dimacs is not None:
        with open(dump_dimacs, "w", encoding="utf-8") as handle:
            handle.write(sat.to_dimacs(
                builder.num_vars, builder.clauses,
                [f"counterexample search: {sys.name} n={n}, {len(traps)} traps"],
            ))

    model = builder.solve()
    if model is None:
        return None
    config = _decode_config(sys, n, pre_vars, model)
    chosen = None
    for occ, s in zip(occurrences, selectors):
        if model[s]:
            chosen = occ
            break
    assert chosen is not None and is_enabled(sys, config, chosen)
    succ = apply_occurrence(sys, config, chosen)
    assert _decode_config(sys, n, post_vars, model) == succ
    return config, chosen, succ


def find_excluding_trap(sys: ParamSystem, n: int, config, dump_dimacs=None):
    """A structural trap the given configuration misses, subset-minimized,
    or None if every trap meets the configuration."""
    cnf = encode_trap_constraints(sys, n)
    exclusion = [[-cnf.var_of[cell]] for cell in sorted(cells_of(sys, config),
                                                        key=cell_sort_key)]
    if dump_dimacs is not None:
        with open(dump_dimacs, "w", encoding="utf-8") as handle:
            handle.write(cnf.to_dimacs(exclusion))
    model = sat.solve(cnf.to_clauses() + exclusion, len(cnf.var_of))
    if model is None:
        return None
    constraints = cnf.constraints
    members = set(cnf.decode(model).cells)
    for cell in sorted(members, key=cell_sort_key):
        smaller = members - {cell}
        if all(con.holds(smaller) for con in constraints):
            members = smaller
    trap = Powerword(n, frozenset(members))
    assert not intersects(sys, config, trap)
    return trap


# ---------------------------------------------------------------------------
# refinement loop


@dataclass
class CegarResult:
    verdict: str  # "proved" | "unknown"
    traps: list
    counterexample: tuple | None
    iterations: int
    initial_violation: bool = False
    capped: bool = False


def cegar(
    sys: ParamSystem,
    n: int,
    prop: Property,
    max_iterations: int = 200,
    assume_property: bool = True,
    dump_dir=None,
) -> CegarResult:
    """Refine a trap set until it separates all violating steps, or give up.

    "proved" means: no well-formed step from a configuration meeting every
    collected trap can violate the property.  Since actual runs start in the
    initial configuration and traps survive steps, the property then holds
    for the whole reachable space of this instance size.
    """
    if not eval_property_config(sys, initial_config(sys, n), prop):
        return CegarResult("unknown", [], None, 0, initial_violation=True)
    traps: list = []
    for iteration in range(1, max_iterations + 1):
        dump_cx = dump_ex = None
        if dump_dir is not None:
            dump_cx = f"{dump_dir}/counterexample_n{n}_i{iteration}.cnf"
            dump_ex = f"{dump_dir}/trap_n{n}_i{iteration}.cnf"
        found = find_counterexample(
            sys, n, traps, prop, assume_property, dump_dimacs=dump_cx)
        if found is None:
            return CegarResult("proved", traps, None, iteration - 1)
        trap = find_excluding_trap(sys, n, found[0], dump_dimacs=dump_ex)
        if trap is None:
            return CegarResult("unknown", traps, found, iteration)
        traps.append(trap)
    return CegarResult("unknown", traps, None, max_iterations, capped=True)


# ---------------------------------------------------------------------------
# serialization and rendering


def _slot_label(slot) -> str:
    if isinstance(slot, tuple):
        return f"{slot[0]}.{slot[1]}"
    return slot


def _slot_from_label(sys: ParamSystem, label: str):
    head, dot, tail = label.partition(".")
    if dot and head.isdigit():
        return (int(head), tail)
    return label


def powerword_to_json(sys: ParamSystem, pw: Powerword) -> dict:
    entries = []
    for agent in range(pw.n):
        entry = {}
        for slot in sorted(slot_ids(sys, pw.n), key=slot_sort_key):
            values = sorted(pw.entry(agent, slot))
            if values:
                entry[_slot_label(slot)] = values
        entries.append(entry)
    return {"n": pw.n, "entries": entries}


def powerword_from_json(sys: ParamSystem, data) -> Powerword:
    if not isinstance(data, dict) or "n" not in data or "entries" not in data:
        raise ModelError("powerword json needs 'n' and 'entries'")
    n = data["n"]
    entries = data["entries"]
    if len(entries) != n:
        raise ModelError(f"powerword json: {len(entries)} entries for n={n}")
    cells = set()
    for agent, entry in enumerate(entries):
        for label, values in entry.items():
            slot = _slot_from_label(sys, label)
            for value in values:
                cells.add((agent, slot, value))
    pw = Powerword(n, frozenset(cells))
    validate_powerword(sys, pw)
    return pw


def format_powerword(sys: ParamSystem, pw: Powerword) -> str:
    """Table in the style of the configuration renderer, entries as sets."""
    slots = sorted(slot_ids(sys, pw.n), key=slot_sort_key)
    rows = []
    for slot in slots:
        cells = []
        for agent in range(pw.n):
            values = sorted(pw.entry(agent, slot))
            cells.append("{" + ",".join(values) + "}" if values else "∅")
        rows.append((_slot_label(slot), cells))
    label_w = max(len(label) for label, _ in rows)
    col_w = [
        max(len(rows[r][1][j]) for r in range(len(rows))) for j in range(pw.n)
    ]
    header = " " * label_w + "  " + "  ".join(
        str(j).rjust(col_w[j]) for j in range(pw.n))
    lines = [header]
    for label, cells in rows:
        lines.append(
            label.rjust(label_w) + "  "
            + "  ".join(c.rjust(col_w[j]) for j, c in enumerate(cells))
        )
    return "\n".join(lines)
