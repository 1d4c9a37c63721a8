"""Self-contained SAT backend.

A small conflict-driven clause learning solver (two watched literals, first
unique implication point learning, activity-based decisions, phase saving).
Instances in this project are small, so the emphasis is on being readable
and deterministic rather than fast.  A DIMACS writer and a driver for an
external DIMACS solver are provided as an escape hatch.

Literals are nonzero ints, DIMACS style: variable v is v, its negation -v.
"""

from __future__ import annotations

import itertools
import subprocess


class SatError(RuntimeError):
    pass


class Solver:
    def __init__(self, num_vars: int = 0):
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: list = [None]
        self.reason: list = [None]
        self.level: list = [0]
        self.activity: list = [0.0]
        self.phase: list = [False]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.prop_head = 0
        self.ok = True
        self.var_inc = 1.0
        self.grow_to(num_vars)

    def grow_to(self, num_vars: int) -> None:
        while self.num_vars < num_vars:
            self.num_vars += 1
            self.assign.append(None)
            self.reason.append(None)
            self.level.append(0)
            self.activity.append(0.0)
            self.phase.append(False)

    # -- clause management --------------------------------------------------

    def add_clause(self, lits) -> None:
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return  # tautology
        for l in lits:
            self.grow_to(abs(l))
        if self.trail_lim:
            raise SatError("clauses must be added before solving")
        lits = [l for l in lits if self._value(l) is not False]
        if any(self._value(l) is True for l in lits):
            return
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            self._enqueue(lits[0], None)
            return
        self._attach(lits)

    def _attach(self, lits: list[int]) -> int:
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.watches.setdefault(lits[0], []).append(idx)
        self.watches.setdefault(lits[1], []).append(idx)
        return idx

    def _value(self, lit: int):
        v = self.assign[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def _enqueue(self, lit: int, reason) -> bool:
        val = self._value(lit)
        if val is not None:
            return val
        var = abs(lit)
        self.assign[var] = lit > 0
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.phase[var] = lit > 0
        self.trail.append(lit)
        return True

    # -- propagation ----------------------------------------------------------

    def _propagate(self):
        """Unit propagation; returns a conflicting clause (list) or None."""
        while self.prop_head < len(self.trail):
            lit = self.trail[self.prop_head]
            self.prop_head += 1
            false_lit = -lit
            watching = self.watches.get(false_lit, [])
            keep = []
            i = 0
            while i < len(watching):
                ci = watching[i]
                i += 1
                clause = self.clauses[ci]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                # clause[1] is the false watch now
                if self._value(clause[0]) is True:
                    keep.append(ci)
                    continue
                moved = False
                for k in range(2, len(clause)):
                    if self._value(clause[k]) is not False:
                        clause[1], clause[k] = clause[k], clause[1]
                        self.watches.setdefault(clause[1], []).append(ci)
                        moved = True
                        break
                if moved:
                    continue
                keep.append(ci)
                if self._value(clause[0]) is False:
                    keep.extend(watching[i:])
                    self.watches[false_lit] = keep
                    return clause
                self._enqueue(clause[0], ci)
            self.watches[false_lit] = keep
        return None

    # -- conflict analysis ----------------------------------------------------

    def _bump(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            for v in range(1, self.num_vars + 1):
                self.activity[v] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, conflict: list[int]):
        current = len(self.trail_lim)
        learnt: list[int] = []
        seen = [False] * (self.num_vars + 1)
        counter = 0
        p = None
        reason = conflict
        idx = len(self.trail) - 1
        while True:
            for q in reason:
                if p is not None and q == -p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] >= current:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            r = self.reason[abs(p)]
            reason = self.clauses[r] if isinstance(r, int) else []
        learnt.insert(0, -p)
        if len(learnt) == 1:
            back = 0
        else:
            back = max(self.level[abs(l)] for l in learnt[1:])
        return learnt, back

    def _backtrack(self, target_level: int) -> None:
        while len(self.trail_lim) > target_level:
            lim = self.trail_lim.pop()
            for lit in self.trail[lim:]:
                self.assign[abs(lit)] = None
                self.reason[abs(lit)] = None
            del self.trail[lim:]
        self.prop_head = min(self.prop_head, len(self.trail))

    def _decide(self) -> int | None:
        best = None
        best_act = -1.0
        for v in range(1, self.num_vars + 1):
            if self.assign[v] is None and self.activity[v] > best_act:
                best = v
                best_act = self.activity[v]
        if best is None:
            return None
        return best if self.phase[best] else -best

    # -- main loop -------------------------------------------------------------

    def solve(self, max_conflicts: int | None = None):
        """Returns a model as a dict {var: bool}, or None if unsatisfiable."""
        if not self.ok:
            return None
        conflicts = 0
        while True:
            conflict = self._propagate()
            if conflict is not None:
                conflicts += 1
                if max_conflicts is not None and conflicts > max_conflicts:
                    raise SatError("conflict budget exhausted")
                if not self.trail_lim:
                    self.ok = False
                    return None
                learnt, back = self._analyze(conflict)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    ci = self._attach_learnt(learnt)
                    self._enqueue(learnt[0], ci)
                self.var_inc /= 0.95
                continue
            lit = self._decide()
            if lit is None:
                return {v: self.assign[v] for v in range(1, self.num_vars + 1)}
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, None)

    def _attach_learnt(self, lits: list[int]) -> int:
        # watch the asserting literal and one literal from the backjump level
        swap = max(range(1, len(lits)), key=lambda k: self.level[abs(lits[k])])
        lits[1], lits[swap] = lits[swap], lits[1]
        return self._attach(lits)


def solve(clauses, num_vars: int | None = None):
    """One-shot interface: list of clauses in, model dict or None out."""
    solver = Solver(num_vars or 0)
    for clause in clauses:
        solver.add_clause(clause)
    return solver.solve()


def check_model(clauses, model) -> bool:
    return all(
        any(model.get(abs(l), False) == (l > 0) for l in clause)
        for clause in clauses
    )


def solve_brute_force(clauses, num_vars: int):
    """Reference solver by enumeration, for cross-checking small instances."""
    for bits in itertools.product((False, True), repeat=num_vars):
        model = {v + 1: bits[v] for v in range(num_vars)}
        if check_model(clauses, model):
            return model
    return None


# ---------------------------------------------------------------------------
# CNF construction with fresh variables


class CnfBuilder:
    """Collects clauses; hands out fresh variables and Tseitin gates."""

    def __init__(self):
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        self.notes: dict[int, object] = {}
        self._true_lit: int | None = None

    def new_var(self, note=None) -> int:
        self.num_vars += 1
        if note is not None:
            self.notes[self.num_vars] = note
        return self.num_vars

    def add_clause(self, lits) -> None:
        self.clauses.append(list(lits))

    def true_lit(self) -> int:
        if self._true_lit is None:
            self._true_lit = self.new_var("const_true")
            self.add_clause([self._true_lit])
        return self._true_lit

    def false_lit(self) -> int:
        return -self.true_lit()

    def and_gate(self, lits) -> int:
        lits = list(lits)
        if not lits:
            return self.true_lit()
        if len(lits) == 1:
            return lits[0]
        g = self.new_var()
        for l in lits:
            self.add_clause([-g, l])
        self.add_clause([g] + [-l for l in lits])
        return g

    def or_gate(self, lits) -> int:
        lits = list(lits)
        if not lits:
            return self.false_lit()
        if len(lits) == 1:
            return lits[0]
        g = self.new_var()
        for l in lits:
            self.add_clause([-l, g])
        self.add_clause([-g] + lits)
        return g

    def at_least_gate(self, lits, k: int) -> int:
        """Gate that is true iff at least k of the literals are true.

        Subset expansion; fine for the small cardinalities used here.
        """
        lits = list(lits)
        if k <= 0:
            return self.true_lit()
        if k > len(lits):
            return self.false_lit()
        return self.or_gate(
            self.and_gate(subset) for subset in itertools.combinations(lits, k)
        )

    def add_exactly_one(self, lits) -> None:
        lits = list(lits)
        self.add_clause(lits)
        for a, b in itertools.combinations(lits, 2):
            self.add_clause([-a, -b])

    def add_at_most_one(self, lits) -> None:
        for a, b in itertools.combinations(list(lits), 2):
            self.add_clause([-a, -b])

    def solve(self):
        return solve(self.clauses, self.num_vars)


# ---------------------------------------------------------------------------
# DIMACS and external solvers


def to_dimacs(num_vars: int, clauses, comments=()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {num_vars} {len(clauses)}")
    for clause in clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs_output(text: str):
    """Parse minisat-style output: s-line verdict plus v-lines."""
    verdict = None
    lits: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("s "):
            verdict = line[2:].strip()
        elif line.upper() in ("SATISFIABLE", "UNSATISFIABLE", "UNSAT", "SAT"):
            verdict = line.upper()
        elif line.startswith("v "):
            lits.extend(int(x) for x in line[2:].split() if x != "0")
    if verdict is None:
        raise SatError("external solver produced no verdict line")
    if verdict.upper().startswith("UNSAT"):
        return None
    model = {}
    for l in lits:
        model[abs(l)] = l > 0
    return model


def solve_external(command, num_vars: int, clauses, timeout: float = 300.0):
    """Run an external DIMACS solver (argv list); returns model dict or None."""
    dimacs = to_dimacs(num_vars, clauses)
    try:
        proc = subprocess.run(
            list(command), input=dimacs, capture_output=True, text=True,
            timeout=timeout,
        )
    except FileNotFoundError as exc:
        raise SatError(f"external solver not found: {command[0]}") from exc
    except subprocess.TimeoutExpired as exc:
        raise SatError(f"external solver timed out after {timeout}s") from exc
    model = parse_dimacs_output(proc.stdout)
    if model is not None:
        model = {v: model.get(v, False) for v in range(1, num_vars + 1)}
        if not check_model(clauses, model):
            raise SatError("external solver returned a non-model")
    return model
