import pytest

from paratrap.builtins import builtin, builtin_names, builtin_source
from paratrap.dsl import (
    ParseError,
    parse_guard,
    parse_property,
    parse_system,
    pretty_print,
)
from paratrap.model import (
    AtLeastState,
    AtLeastVar,
    GuardAnd,
    GuardNot,
    GuardOr,
    GuardSelf,
    GuardVarEq,
    ModelError,
    PropNot,
    validate_system,
)


class TestFlagProtocolSource:
    def test_structure(self, flag):
        assert flag.name == "example21"
        assert flag.states == ("initial", "loop", "break", "critical", "done")
        assert flag.initial_state == "initial"
        (b,) = flag.variables
        assert b.name == "b" and b.values == ("true", "false")
        assert b.initial == "false"
        assert len(flag.local_transitions) == 4
        (t,) = flag.loop_transitions
        assert t.name == "tlp"
        assert (t.origin, t.target_succ, t.target_fail) == ("loop", "critical", "break")
        assert t.guard == GuardOr((GuardSelf(), GuardVarEq("b", "false")))

    def test_mutex_property(self, flag):
        assert flag.property_named("mutex") == PropNot(AtLeastState(2, "critical"))

    def test_flag_raising_transition(self, flag):
        t = flag.local_transitions[0]
        assert (t.origin, t.target) == ("initial", "loop")
        assert t.assignments == (("b", "true"),)


class TestGuardParsing:
    def test_atoms(self):
        assert parse_guard("b == false") == GuardVarEq("b", "false")
        assert parse_guard("self") == GuardSelf()

    def test_precedence(self):
        g = parse_guard("self | a == 0 & !(b == 1)")
        assert g == GuardOr((GuardSelf(),
                             GuardAnd((GuardVarEq("a", "0"),
                                       GuardNot(GuardVarEq("b", "1"))))))

    def test_parens(self):
        g = parse_guard("(self | a == 0) & b == 1")
        assert isinstance(g, GuardAnd)

    def test_errors(self):
        with pytest.raises(ParseError):
            parse_guard("a ==")
        with pytest.raises(ParseError):
            parse_guard("a == 0 &")
        with pytest.raises(ParseError):
            parse_guard("(a == 0")


class TestPropertyParsing:
    def test_at_least_state(self):
        assert parse_property("atLeast(2, state=critical)") == \
            AtLeastState(2, "critical")

    def test_at_least_var(self):
        assert parse_property("atLeast(1, b=true)") == AtLeastVar(1, "b", "true")

    def test_negation_and_connectives(self):
        p = parse_property("!atLeast(2, state=c) | atLeast(1, state=d)")
        assert p == parse_property("(!atLeast(2, state=c)) | atLeast(1, state=d)")

    def test_errors(self):
        with pytest.raises(ParseError):
            parse_property("atLeast(x, state=c)")
        with pytest.raises(ParseError):
            parse_property("atLeast(2 state=c)")


class TestSystemParsing:
    def test_round_trip_through_pretty_printer(self, flag):
        text = pretty_print(flag)
        again = parse_system(text, source="pretty")
        assert again == flag
        assert pretty_print(again) == text

    def test_every_builtin_parses_and_validates(self):
        names = builtin_names()
        assert "example21" in names and len(names) >= 5
        for name in names:
            sys = builtin(name)
            validate_system(sys)
            assert parse_system(builtin_source(name)) == sys

    def test_unknown_builtin(self):
        with pytest.raises(ModelError):
            builtin("nonesuch")

    def test_pointer_clauses(self):
        sys = builtin("dijkstra")
        assert [p.name for p in sys.pointers] == ["turn"]
        grabs = [t for t in sys.local_transitions if t.sets_pointer == "turn"]
        assert grabs and grabs[0].pointer_guard is not None
        pg = grabs[0].pointer_guard
        assert (pg.pointer, pg.var, pg.value) == ("turn", "b", "true")

    def test_capture_clause(self):
        sys = builtin("debruijn")
        caps = [t for t in sys.loop_transitions if t.capture is not None]
        assert caps and caps[0].capture.pointer == "turn"

    def test_line_numbers_in_errors(self):
        src = "system t\n\nstates: a b\ninit: a\n\nlocal a => b { }\n"
        with pytest.raises(ParseError) as err:
            parse_system(src)
        assert err.value.line == 6

    def test_duplicate_variable(self):
        src = ("system t\nstates: a\ninit: a\n"
               "var x : { 0 1 } = 0\nvar x : { 0 1 } = 0\n")
        with pytest.raises((ParseError, ModelError)):
            parse_system(src)

    def test_unknown_directive(self):
        with pytest.raises(ParseError):
            parse_system("system t\nstates: a\ninit: a\nfrobnicate: yes\n")

    def test_missing_init(self):
        with pytest.raises((ParseError, ModelError)):
            parse_system("system t\nstates: a b\n")

    def test_looptrans_requires_branches(self):
        src = ("system t\nstates: a b\ninit: a\n"
               "looptrans w : a [ true ] b\n")
        with pytest.raises(ParseError):
            parse_system(src)

    def test_minimal_system_without_transitions(self):
        sys = parse_system("system t\nstates: a\ninit: a\n")
        validate_system(sys)
        assert sys.local_transitions == () and sys.loop_transitions == ()
