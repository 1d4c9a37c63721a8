"""Core model types for parameterized systems with non-atomic global checks.

A system describes one agent template: finite control states, finite-range
local variables, local transitions (atomic) and loop transitions (an agent
walks over all agents, one inspection per atomic step, and branches on
whether every inspected agent satisfied the guard).  Global pointers are an
optional extension: a pointer designates one agent and can be dereferenced
in guards, grabbed ("set to self") or captured during a loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ModelError(ValueError):
    """Raised for malformed systems, guards or properties."""


# ---------------------------------------------------------------------------
# guards


class Guard:
    """Boolean condition evaluated against one inspected agent."""

    __slots__ = ()


@dataclass(frozen=True)
class GuardConst(Guard):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class GuardVarEq(Guard):
    """Atom ``var == value`` on the inspected agent."""

    var: str
    value: str

    def __str__(self):
        return f"{self.var} == {self.value}"


@dataclass(frozen=True)
class GuardSelf(Guard):
    """Atom that holds exactly when an agent inspects itself."""

    def __str__(self):
        return "self"


@dataclass(frozen=True)
class GuardNot(Guard):
    inner: Guard

    def __str__(self):
        return f"!{_wrap(self.inner, 3)}"


@dataclass(frozen=True)
class GuardAnd(Guard):
    items: tuple[Guard, ...]

    def __str__(self):
        return " & ".join(_wrap(i, 2) for i in self.items)


@dataclass(frozen=True)
class GuardOr(Guard):
    items: tuple[Guard, ...]

    def __str__(self):
        return " | ".join(_wrap(i, 1) for i in self.items)


def _level(g: Guard) -> int:
    if isinstance(g, GuardOr):
        return 1
    if isinstance(g, GuardAnd):
        return 2
    return 3


def _wrap(g: Guard, need: int) -> str:
    text = str(g)
    return text if _level(g) >= need else f"({text})"


def eval_guard(guard: Guard, valuation, is_self: bool) -> bool:
    """Evaluate a guard against a variable valuation of the inspected agent.

    ``valuation`` must define every variable the guard mentions; ``is_self``
    tells whether the inspecting agent is looking at itself.
    """
    if isinstance(guard, GuardConst):
        return guard.value
    if isinstance(guard, GuardVarEq):
        if guard.var not in valuation:
            raise ModelError(f"guard mentions unassigned variable {guard.var!r}")
        return valuation[guard.var] == guard.value
    if isinstance(guard, GuardSelf):
        return is_self
    if isinstance(guard, GuardNot):
        return not eval_guard(guard.inner, valuation, is_self)
    if isinstance(guard, GuardAnd):
        return all(eval_guard(i, valuation, is_self) for i in guard.items)
    if isinstance(guard, GuardOr):
        return any(eval_guard(i, valuation, is_self) for i in guard.items)
    raise ModelError(f"unknown guard node {guard!r}")


def guard_vars(guard: Guard) -> set[str]:
    """Names of variables the guard mentions."""
    if isinstance(guard, GuardVarEq):
        return {guard.var}
    if isinstance(guard, GuardNot):
        return guard_vars(guard.inner)
    if isinstance(guard, (GuardAnd, GuardOr)):
        out: set[str] = set()
        for item in guard.items:
            out |= guard_vars(item)
        return out
    return set()


# ---------------------------------------------------------------------------
# safety properties


class Property:
    """Boolean combination of counting atoms over a configuration."""

    __slots__ = ()


@dataclass(frozen=True)
class AtLeastState(Property):
    """At least ``count`` agents sit at control state ``state``."""

    count: int
    state: str

    def __str__(self):
        return f"atLeast({self.count}, state={self.state})"


@dataclass(frozen=True)
class AtLeastVar(Property):
    """At least ``count`` agents have ``var == value``."""

    count: int
    var: str
    value: str

    def __str__(self):
        return f"atLeast({self.count}, {self.var}={self.value})"


@dataclass(frozen=True)
class PropNot(Property):
    inner: Property

    def __str__(self):
        return f"!{_pwrap(self.inner, 3)}"


@dataclass(frozen=True)
class PropAnd(Property):
    items: tuple[Property, ...]

    def __str__(self):
        return " & ".join(_pwrap(i, 2) for i in self.items)


@dataclass(frozen=True)
class PropOr(Property):
    items: tuple[Property, ...]

    def __str__(self):
        return " | ".join(_pwrap(i, 1) for i in self.items)


def _plevel(p: Property) -> int:
    if isinstance(p, PropOr):
        return 1
    if isinstance(p, PropAnd):
        return 2
    return 3


def _pwrap(p: Property, need: int) -> str:
    text = str(p)
    return text if _plevel(p) >= need else f"({text})"


def eval_property(prop: Property, count_state, count_var) -> bool:
    """Evaluate a property given counting callbacks.

    ``count_state(q)`` and ``count_var(var, val)`` return how many agents of
    a configuration satisfy the respective atom.
    """
    if isinstance(prop, AtLeastState):
        return count_state(prop.state) >= prop.count
    if isinstance(prop, AtLeastVar):
        return count_var(prop.var, prop.value) >= prop.count
    if isinstance(prop, PropNot):
        return not eval_property(prop.inner, count_state, count_var)
    if isinstance(prop, PropAnd):
        return all(eval_property(i, count_state, count_var) for i in prop.items)
    if isinstance(prop, PropOr):
        return any(eval_property(i, count_state, count_var) for i in prop.items)
    raise ModelError(f"unknown property node {prop!r}")


# ---------------------------------------------------------------------------
# declarations and transitions


@dataclass(frozen=True)
class VariableDecl:
    name: str
    values: tuple[str, ...]
    initial: str


@dataclass(frozen=True)
class PointerDecl:
    """A global pointer: designates exactly one agent, initially agent 0."""

    name: str


@dataclass(frozen=True)
class PointerGuard:
    """Side condition ``pointer.var == value`` on a local transition.

    The condition dereferences the pointer and tests a variable of the agent
    it currently designates.
    """

    pointer: str
    var: str
    value: str


@dataclass(frozen=True)
class Capture:
    """Loop attachment: while iterating, move a pointer onto every inspected
    agent that satisfies the condition."""

    pointer: str
    condition: Guard


@dataclass(frozen=True)
class LocalTransition:
    """Atomic step of one agent: leave ``origin``, write the assigned
    values, arrive at ``target``."""

    origin: str
    assignments: tuple[tuple[str, str], ...]
    target: str
    pointer_guard: PointerGuard | None = None
    sets_pointer: str | None = None  # pointer grabbed ("set to self"), if any


@dataclass(frozen=True)
class LoopTransition:
    """Non-atomic global check.

    An agent at ``origin`` starts iterating: it inspects agents 0, 1, ... one
    atomic step at a time.  An inspected agent failing the guard aborts the
    iteration to ``target_fail``; passing the last agent ends it at
    ``target_succ``.  While iterating, the agent occupies the transition
    itself as its location.
    """

    name: str
    origin: str
    guard: Guard
    target_succ: str
    target_fail: str
    capture: Capture | None = None


@dataclass(frozen=True)
class ParamSystem:
    name: str
    states: tuple[str, ...]
    initial_state: str
    variables: tuple[VariableDecl, ...]
    local_transitions: tuple[LocalTransition, ...]
    loop_transitions: tuple[LoopTransition, ...]
    pointers: tuple[PointerDecl, ...] = ()
    properties: tuple[tuple[str, Property], ...] = ()

    # -- lookup helpers ----------------------------------------------------

    def variable(self, name: str) -> VariableDecl:
        for v in self.variables:
            if v.name == name:
                return v
        raise ModelError(f"system {self.name!r} has no variable {name!r}")

    def var_index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise ModelError(f"system {self.name!r} has no variable {name!r}")

    def loop(self, name: str) -> LoopTransition:
        for t in self.loop_transitions:
            if t.name == name:
                return t
        raise ModelError(f"system {self.name!r} has no loop transition {name!r}")

    def property_named(self, name: str) -> Property:
        for pname, prop in self.properties:
            if pname == name:
                return prop
        raise ModelError(f"system {self.name!r} has no property {name!r}")

    def initial_valuation(self) -> tuple[str, ...]:
        return tuple(v.initial for v in self.variables)

    def loc_values(self) -> tuple[str, ...]:
        """Alphabet of the location slot: control states, then loop names."""
        return self.states + tuple(t.name for t in self.loop_transitions)

    def transition_labels(self) -> list[str]:
        """Stable labels, locals first then loops by name."""
        labels = [local_label(i, t) for i, t in enumerate(self.local_transitions)]
        labels.extend(t.name for t in self.loop_transitions)
        return labels


def local_label(index: int, t: LocalTransition) -> str:
    return f"l{index}_{t.origin}_to_{t.target}"


_IDENT_BLOCKLIST = {"self", "state", "true", "false"}


def validate_system(sys: ParamSystem) -> None:
    """Check well-formedness; raises ModelError on the first offense."""
    if not sys.states:
        raise ModelError("system declares no states")
    if len(set(sys.states)) != len(sys.states):
        raise ModelError("duplicate state names")
    if sys.initial_state not in sys.states:
        raise ModelError(f"initial state {sys.initial_state!r} is not declared")

    var_names = [v.name for v in sys.variables]
    if len(set(var_names)) != len(var_names):
        raise ModelError("duplicate variable names")
    for v in sys.variables:
        if v.name in _IDENT_BLOCKLIST or v.name == "loc":
            raise ModelError(f"variable name {v.name!r} is reserved")
        if not v.values:
            raise ModelError(f"variable {v.name!r} has an empty range")
        if len(set(v.values)) != len(v.values):
            raise ModelError(f"variable {v.name!r} repeats a value")
        if v.initial not in v.values:
            raise ModelError(
                f"variable {v.name!r}: initial value {v.initial!r} outside range"
            )

    loop_names = [t.name for t in sys.loop_transitions]
    ptr_names = [p.name for p in sys.pointers]
    if len(set(loop_names)) != len(loop_names):
        raise ModelError("duplicate loop transition names")
    if len(set(ptr_names)) != len(ptr_names):
        raise ModelError("duplicate pointer names")
    taken = set(sys.states) | set(var_names)
    for name in loop_names + ptr_names:
        if name in taken or name == "loc":
            raise ModelError(f"name {name!r} collides with another declaration")
        taken.add(name)

    def check_var_value(var: str, value: str, where: str) -> None:
        decl = None
        for v in sys.variables:
            if v.name == var:
                decl = v
        if decl is None:
            raise ModelError(f"{where}: unknown variable {var!r}")
        if value not in decl.values:
            raise ModelError(f"{where}: value {value!r} outside range of {var!r}")

    def check_guard(g: Guard, where: str) -> None:
        if isinstance(g, GuardVarEq):
            check_var_value(g.var, g.value, where)
        elif isinstance(g, GuardNot):
            check_guard(g.inner, where)
        elif isinstance(g, (GuardAnd, GuardOr)):
            for item in g.items:
                check_guard(item, where)
        elif not isinstance(g, (GuardConst, GuardSelf)):
            raise ModelError(f"{where}: unknown guard node {g!r}")

    def check_pointer(name: str, where: str) -> None:
        if name not in ptr_names:
            raise ModelError(f"{where}: unknown pointer {name!r}")

    for i, t in enumerate(sys.local_transitions):
        where = f"local transition #{i} ({t.origin} -> {t.target})"
        if t.origin not in sys.states:
            raise ModelError(f"{where}: unknown origin state")
        if t.target not in sys.states:
            raise ModelError(f"{where}: unknown target state")
        seen = set()
        for var, value in t.assignments:
            if var in seen:
                raise ModelError(f"{where}: variable {var!r} assigned twice")
            seen.add(var)
            check_var_value(var, value, where)
        if t.pointer_guard is not None:
            check_pointer(t.pointer_guard.pointer, where)
            check_var_value(t.pointer_guard.var, t.pointer_guard.value, where)
        if t.sets_pointer is not None:
            check_pointer(t.sets_pointer, where)

    for t in sys.loop_transitions:
        where = f"loop transition {t.name!r}"
        if t.origin not in sys.states:
            raise ModelError(f"{where}: unknown origin state")
        if t.target_succ not in sys.states:
            raise ModelError(f"{where}: unknown success target")
        if t.target_fail not in sys.states:
            raise ModelError(f"{where}: unknown failure target")
        check_guard(t.guard, where)
        if t.capture is not None:
            check_pointer(t.capture.pointer, where)
            check_guard(t.capture.condition, f"{where} capture condition")

    def check_property(p: Property, where: str) -> None:
        if isinstance(p, AtLeastState):
            if p.count < 1:
                raise ModelError(f"{where}: count must be at least 1")
            if p.state not in sys.states:
                raise ModelError(f"{where}: unknown state {p.state!r}")
        elif isinstance(p, AtLeastVar):
            if p.count < 1:
                raise ModelError(f"{where}: count must be at least 1")
            check_var_value(p.var, p.value, where)
        elif isinstance(p, PropNot):
            check_property(p.inner, where)
        elif isinstance(p, (PropAnd, PropOr)):
            for item in p.items:
                check_property(item, where)
        else:
            raise ModelError(f"{where}: unknown property node {p!r}")

    pnames = [n for n, _ in sys.properties]
    if len(set(pnames)) != len(pnames):
        raise ModelError("duplicate property names")
    for pname, prop in sys.properties:
        check_property(prop, f"property {pname!r}")
