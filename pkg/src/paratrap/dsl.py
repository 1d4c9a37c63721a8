"""Line-oriented text format for system descriptions.

Grammar, one declaration per line, ``#`` starts a comment:

    system <name>
    states: <id> <id> ...
    init: <id>
    var <id> : { <id> ... } = <id>
    pointer <id>
    local <state> -> <state> { <var> := <val>, ... }
          [when <ptr>.<var> == <val>] [set <ptr> := self]
    looptrans <name> : <state> [ <guard> ] ? <succ-state> : <fail-state>
          [capture <ptr> when <guard>]
    property <name> : <boolean expr over atLeast(k, state=q) and atLeast(k, v=val)>

Guards are boolean expressions over ``<var> == <val>``, ``self``, ``true``
and ``false`` with ``!``, ``&``, ``|`` and parentheses.
"""

from __future__ import annotations

import re

from .model import (
    AtLeastState,
    AtLeastVar,
    Capture,
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
    PointerDecl,
    PointerGuard,
    PropAnd,
    PropNot,
    PropOr,
    Property,
    VariableDecl,
    validate_system,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"line {line}" + (f", col {col}" if col else "")
        super().__init__(f"{where}: {message}" if line else message)


_TOKEN_RE = re.compile(
    r"(->|:=|==|[A-Za-z_][A-Za-z0-9_]*|[0-9]+|[{}\[\]():?,.!&|=])"
)


def _tokenize(text: str, lineno: int) -> list[tuple[str, int]]:
    text = text.split("#", 1)[0]
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        tokens.append((m.group(0), pos + 1))
        pos = m.end()
    return tokens


class _Line:
    """One logical line as a token cursor."""

    def __init__(self, tokens: list[tuple[str, int]], lineno: int):
        self.tokens = tokens
        self.lineno = lineno
        self.pos = 0

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def col(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return self.tokens[-1][1] if self.tokens else 0

    def next(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of line", self.lineno, self.col())
        self.pos += 1
        return tok

    def expect(self, want: str) -> None:
        tok = self.peek()
        if tok != want:
            raise ParseError(
                f"expected {want!r}, found {tok!r}" if tok else f"expected {want!r}",
                self.lineno,
                self.col(),
            )
        self.pos += 1

    def ident(self, what: str = "identifier") -> str:
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            raise ParseError(f"expected {what}, found {tok!r}", self.lineno, self.col())
        self.pos += 1
        return tok

    def value(self, what: str = "value") -> str:
        # variable values may be plain numerals, unlike other identifiers
        tok = self.peek()
        if tok is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*|[0-9]+", tok):
            raise ParseError(f"expected {what}, found {tok!r}", self.lineno, self.col())
        self.pos += 1
        return tok

    def integer(self) -> int:
        tok = self.peek()
        if tok is None or not tok.isdigit():
            raise ParseError(f"expected integer, found {tok!r}", self.lineno, self.col())
        self.pos += 1
        return int(tok)

    def done(self) -> None:
        if self.pos != len(self.tokens):
            raise ParseError(
                f"trailing input {self.tokens[self.pos][0]!r}", self.lineno, self.col()
            )


# -- guard expressions ------------------------------------------------------


def _parse_guard_or(line: _Line) -> Guard:
    items = [_parse_guard_and(line)]
    while line.peek() == "|":
        line.next()
        items.append(_parse_guard_and(line))
    return items[0] if len(items) == 1 else GuardOr(tuple(items))


def _parse_guard_and(line: _Line) -> Guard:
    items = [_parse_guard_unary(line)]
    while line.peek() == "&":
        line.next()
        items.append(_parse_guard_unary(line))
    return items[0] if len(items) == 1 else GuardAnd(tuple(items))


def _parse_guard_unary(line: _Line) -> Guard:
    tok = line.peek()
    if tok == "!":
        line.next()
        return GuardNot(_parse_guard_unary(line))
    if tok == "(":
        line.next()
        inner = _parse_guard_or(line)
        line.expect(")")
        return inner
    if tok == "self":
        line.next()
        return GuardSelf()
    if tok == "true":
        line.next()
        return GuardConst(True)
    if tok == "false":
        line.next()
        return GuardConst(False)
    var = line.ident("guard atom")
    line.expect("==")
    value = line.value()
    return GuardVarEq(var, value)


def parse_guard(text: str, lineno: int = 0) -> Guard:
    line = _Line(_tokenize(text, lineno), lineno)
    guard = _parse_guard_or(line)
    line.done()
    return guard


# -- property expressions ----------------------------------------------------


def _parse_prop_or(line: _Line) -> Property:
    items = [_parse_prop_and(line)]
    while line.peek() == "|":
        line.next()
        items.append(_parse_prop_and(line))
    return items[0] if len(items) == 1 else PropOr(tuple(items))


def _parse_prop_and(line: _Line) -> Property:
    items = [_parse_prop_unary(line)]
    while line.peek() == "&":
        line.next()
        items.append(_parse_prop_unary(line))
    return items[0] if len(items) == 1 else PropAnd(tuple(items))


def _parse_prop_unary(line: _Line) -> Property:
    tok = line.peek()
    if tok == "!":
        line.next()
        return PropNot(_parse_prop_unary(line))
    if tok == "(":
        line.next()
        inner = _parse_prop_or(line)
        line.expect(")")
        return inner
    if tok == "atLeast":
        line.next()
        line.expect("(")
        count = line.integer()
        line.expect(",")
        lhs = line.ident()
        line.expect("=")
        rhs = line.value()
        line.expect(")")
        if lhs == "state":
            return AtLeastState(count, rhs)
        return AtLeastVar(count, lhs, rhs)
    raise ParseError(f"expected property atom, found {tok!r}", line.lineno, line.col())


def parse_property(text: str, lineno: int = 0) -> Property:
    line = _Line(_tokenize(text, lineno), lineno)
    prop = _parse_prop_or(line)
    line.done()
    return prop


# -- declarations -------------------------------------------------------------


def _parse_local(line: _Line) -> LocalTransition:
    origin = line.ident("origin state")
    line.expect("->")
    target = line.ident("target state")
    line.expect("{")
    assignments = []
    while line.peek() != "}":
        var = line.ident("variable")
        line.expect(":=")
        value = line.value()
        assignments.append((var, value))
        if line.peek() == ",":
            line.next()
    line.expect("}")
    pointer_guard = None
    sets_pointer = None
    while line.peek() is not None:
        tok = line.next()
        if tok == "when":
            ptr = line.ident("pointer")
            line.expect(".")
            var = line.ident("variable")
            line.expect("==")
            value = line.value()
            pointer_guard = PointerGuard(ptr, var, value)
        elif tok == "set":
            ptr = line.ident("pointer")
            line.expect(":=")
            line.expect("self")
            sets_pointer = ptr
        else:
            raise ParseError(f"unexpected {tok!r} after local transition",
                             line.lineno, line.col())
    return LocalTransition(origin, tuple(assignments), target,
                           pointer_guard, sets_pointer)


def _parse_looptrans(line: _Line) -> LoopTransition:
    name = line.ident("loop transition name")
    line.expect(":")
    origin = line.ident("origin state")
    line.expect("[")
    guard = _parse_guard_or(line)
    line.expect("]")
    line.expect("?")
    target_succ = line.ident("success state")
    line.expect(":")
    target_fail = line.ident("failure state")
    capture = None
    if line.peek() == "capture":
        line.next()
        ptr = line.ident("pointer")
        line.expect("when")
        condition = _parse_guard_or(line)
        capture = Capture(ptr, condition)
    line.done()
    return LoopTransition(name, origin, guard, target_succ, target_fail, capture)


def parse_system(text: str, source: str = "<string>") -> ParamSystem:
    """Parse a full system description; raises ParseError with position info."""
    name = None
    states: tuple[str, ...] | None = None
    init = None
    variables: list[VariableDecl] = []
    pointers: list[PointerDecl] = []
    local_transitions: list[LocalTransition] = []
    loop_transitions: list[LoopTransition] = []
    properties: list[tuple[str, Property]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(raw, lineno)
        if not tokens:
            continue
        line = _Line(tokens, lineno)
        head = line.next()
        if head == "system":
            if name is not None:
                raise ParseError("duplicate system line", lineno)
            name = line.ident("system name")
            line.done()
        elif name is None:
            raise ParseError("file must start with a system line", lineno)
        elif head == "states":
            line.expect(":")
            got = []
            while line.peek() is not None:
                got.append(line.ident("state"))
            if not got:
                raise ParseError("states line declares nothing", lineno)
            states = tuple(got)
        elif head == "init":
            line.expect(":")
            init = line.ident("state")
            line.done()
        elif head == "var":
            vname = line.ident("variable name")
            line.expect(":")
            line.expect("{")
            values = []
            while line.peek() != "}":
                values.append(line.value())
                if line.peek() == ",":
                    line.next()
            line.expect("}")
            line.expect("=")
            initial = line.value("initial value")
            line.done()
            variables.append(VariableDecl(vname, tuple(values), initial))
        elif head == "pointer":
            pointers.append(PointerDecl(line.ident("pointer name")))
            line.done()
        elif head == "local":
            local_transitions.append(_parse_local(line))
        elif head == "looptrans":
            loop_transitions.append(_parse_looptrans(line))
        elif head == "property":
            pname = line.ident("property name")
            line.expect(":")
            prop = _parse_prop_or(line)
            line.done()
            properties.append((pname, prop))
        else:
            raise ParseError(f"unknown declaration {head!r}", lineno, tokens[0][1])

    if name is None:
        raise ParseError("empty input: no system line", 1)
    if states is None:
        raise ParseError(f"{source}: missing states line", 1)
    if init is None:
        raise ParseError(f"{source}: missing init line", 1)

    sys = ParamSystem(
        name=name,
        states=states,
        initial_state=init,
        variables=tuple(variables),
        local_transitions=tuple(local_transitions),
        loop_transitions=tuple(loop_transitions),
        pointers=tuple(pointers),
        properties=tuple(properties),
    )
    try:
        validate_system(sys)
    except ModelError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    return sys


def pretty_print(sys: ParamSystem) -> str:
    """Emit the canonical text form; parse_system inverts it."""
    out = [f"system {sys.name}", ""]
    out.append("states: " + " ".join(sys.states))
    out.append(f"init: {sys.initial_state}")
    if sys.variables or sys.pointers:
        out.append("")
    for v in sys.variables:
        out.append(f"var {v.name} : {{ {' '.join(v.values)} }} = {v.initial}")
    for p in sys.pointers:
        out.append(f"pointer {p.name}")
    if sys.local_transitions or sys.loop_transitions:
        out.append("")
    for t in sys.local_transitions:
        assigns = ", ".join(f"{var} := {val}" for var, val in t.assignments)
        text = f"local {t.origin} -> {t.target} {{ {assigns} }}" if assigns \
            else f"local {t.origin} -> {t.target} {{ }}"
        if t.pointer_guard is not None:
            g = t.pointer_guard
            text += f" when {g.pointer}.{g.var} == {g.value}"
        if t.sets_pointer is not None:
            text += f" set {t.sets_pointer} := self"
        out.append(text)
    for t in sys.loop_transitions:
        text = (f"looptrans {t.name} : {t.origin} [ {t.guard} ] "
                f"? {t.target_succ} : {t.target_fail}")
        if t.capture is not None:
            text += f" capture {t.capture.pointer} when {t.capture.condition}"
        out.append(text)
    if sys.properties:
        out.append("")
    for pname, prop in sys.properties:
        out.append(f"property {pname} : {prop}")
    return "\n".join(out) + "\n"
