"""Shared builders and frozen expected values for the test suite.

Everything here is written against the documented behavior, not against the
implementation: the configurations, traps and languages below were worked
out by hand on the flag protocol (``example21``) and serve as independent
oracles.  Tests compare library output to these frozen values.
"""

from paratrap.builtins import builtin
from paratrap.model import eval_guard, local_label
from paratrap.semantics import ARROW, Letter, mark_position
from paratrap.traps import Powerword
from paratrap.abduction import NormLetter, NormalizedTrap, Token, TrapLanguage

FLAG = builtin("example21")

fs = frozenset


def L(loc, b, *marks):
    """Letter shortcut for the flag protocol: one variable, tuple marks."""
    return Letter(loc, (b,), frozenset(marks))


# ---------------------------------------------------------------------------
# two concrete scan steps at instance size 3, worked out by hand
#
# Agent 1 is mid-scan and inspects agent 0 whose flag is up: the scan aborts
# and agent 1 falls back to break.  Agent 2's scan position is untouched.

SCAN_FAIL_PRE = (
    L("break", "true", (1, "tlp")),
    L("tlp", "true", (2, "tlp")),
    L("tlp", "true"),
)
SCAN_FAIL_POST = (
    L("break", "true"),
    L("break", "true", (2, "tlp")),
    L("tlp", "true"),
)

# Agent 1 inspects the last agent, whose flag is down: the scan completes
# and agent 1 enters the critical section.

SCAN_SUCCEED_PRE = (
    L("initial", "false"),
    L("tlp", "true"),
    L("initial", "false", (1, "tlp")),
)
SCAN_SUCCEED_POST = (
    L("initial", "false"),
    L("critical", "true"),
    L("initial", "false"),
)


# ---------------------------------------------------------------------------
# word surgery fixtures: shifting and removing scan marks on the same word

SURGERY_WORD = SCAN_FAIL_PRE

SURGERY_MOVED_LEFT = (
    L("break", "true", (1, "tlp"), (2, "tlp")),
    L("tlp", "true"),
    L("tlp", "true"),
)
SURGERY_MOVED_RIGHT = (
    L("break", "true", (1, "tlp")),
    L("tlp", "true"),
    L("tlp", "true", (2, "tlp")),
)
SURGERY_DROPPED = (
    L("break", "true", (1, "tlp")),
    L("tlp", "true"),
)


# ---------------------------------------------------------------------------
# a known 7-agent trap of the flag protocol
#
# Agents 3 and 5 are being watched: both sit in {break, loop} with the flag
# down, agent 3's scan mark is somewhere in 0..5 and agent 5's in 0..3.
# Shrinking either mark range breaks the trap condition.


def seven_agent_trap() -> Powerword:
    cells = set()
    for j in range(6):
        cells.add((j, (3, "tlp"), ARROW))
    for j in range(4):
        cells.add((j, (5, "tlp"), ARROW))
    for agent in (3, 5):
        cells.add((agent, "loc", "break"))
        cells.add((agent, "loc", "loop"))
        cells.add((agent, "b", "false"))
    return Powerword(7, frozenset(cells))


def seven_agent_trap_gapped() -> Powerword:
    """Same word with position 2 missing from agent 5's mark row; agent 5's
    scan can walk out of the tracked region there, so this is not a trap."""
    pw = seven_agent_trap()
    return Powerword(7, pw.cells - {(2, (5, "tlp"), ARROW)})


def family_trap(i: int, j: int, n: int) -> Powerword:
    """The same shape at any size: watched agents at positions i < j, agent
    i's mark row filled up to j, agent j's mark row filled up to i."""
    assert 0 <= i < j < n
    cells = set()
    for col in range(j + 1):
        cells.add((col, (i, "tlp"), ARROW))
    for col in range(i + 1):
        cells.add((col, (j, "tlp"), ARROW))
    for agent in (i, j):
        cells.add((agent, "loc", "break"))
        cells.add((agent, "loc", "loop"))
        cells.add((agent, "b", "false"))
    return Powerword(n, frozenset(cells))


# ---------------------------------------------------------------------------
# normalized letters of the family trap (slots: loc, b, p0.tlp, p1.tlp)

NORM_SLOTS = ("loc", "b", ("p0", "tlp"), ("p1", "tlp"))

LETTER_A = NormLetter(None, (fs(), fs(), fs([ARROW]), fs([ARROW])))
LETTER_X = NormLetter("p0", (fs(["break", "loop"]), fs(["false"]),
                             fs([ARROW]), fs([ARROW])))
LETTER_B = NormLetter(None, (fs(), fs(), fs([ARROW]), fs()))
LETTER_Y = NormLetter("p1", (fs(["break", "loop"]), fs(["false"]),
                             fs([ARROW]), fs()))
LETTER_C = NormLetter(None, (fs(), fs(), fs(), fs()))


def family_normalized(i: int, j: int, n: int) -> NormalizedTrap:
    letters = ((LETTER_A,) * i + (LETTER_X,)
               + (LETTER_B,) * (j - i - 1) + (LETTER_Y,)
               + (LETTER_C,) * (n - j - 1))
    return NormalizedTrap(NORM_SLOTS, ("p0", "p1"), letters)


def two_name_language() -> TrapLanguage:
    """The whole family as one regular trap language: any number of A
    letters, the p0 letter, B letters, the p1 letter, C letters."""
    return TrapLanguage(NORM_SLOTS, ("p0", "p1"), (
        Token(LETTER_A, True),
        Token(LETTER_X, False),
        Token(LETTER_B, True),
        Token(LETTER_Y, False),
        Token(LETTER_C, True),
    ))


def initial_marker_language() -> TrapLanguage:
    """Nameless trap language: some agent is still at initial or has raised
    its flag.  Holds initially and survives every step."""
    slots = ("loc", "b")
    blank = NormLetter(None, (fs(), fs()))
    marker = NormLetter(None, (fs(["initial"]), fs(["true"])))
    return TrapLanguage(slots, (), (
        Token(blank, True),
        Token(marker, False),
        Token(blank, True),
    ))


# ---------------------------------------------------------------------------
# an independent step relation, straight from the definition


def naive_successors(sys, config):
    """Reference successor set computed without the occurrence machinery."""
    n = len(config)
    loops = {t.name: t for t in sys.loop_transitions}
    out = set()

    def valuation(letter):
        return {v.name: letter.vals[k] for k, v in enumerate(sys.variables)}

    def move_pointer(letters, pointer, dst):
        res = []
        for idx, lt in enumerate(letters):
            marks = set(lt.marks)
            marks.discard(pointer)
            if idx == dst:
                marks.add(pointer)
            res.append(Letter(lt.loc, lt.vals, frozenset(marks)))
        return res

    for i, letter in enumerate(config):
        if letter.loc in loops:
            t = loops[letter.loc]
            j = mark_position(config, (i, t.name))
            env = valuation(config[j])
            letters = list(config)
            if t.capture is not None and eval_guard(t.capture.condition, env, i == j):
                letters = move_pointer(letters, t.capture.pointer, j)
            lj = letters[j]
            letters[j] = Letter(lj.loc, lj.vals, lj.marks - {(i, t.name)})
            if not eval_guard(t.guard, env, i == j):
                letters[i] = letters[i].with_loc(t.target_fail)
            elif j < n - 1:
                nxt = letters[j + 1]
                letters[j + 1] = Letter(nxt.loc, nxt.vals,
                                        nxt.marks | {(i, t.name)})
            else:
                letters[i] = letters[i].with_loc(t.target_succ)
            out.add(tuple(letters))
            continue
        for t in sys.local_transitions:
            if t.origin != letter.loc:
                continue
            if t.pointer_guard is not None:
                pg = t.pointer_guard
                d = mark_position(config, pg.pointer)
                held = valuation(config[d])
                if held[pg.var] != pg.value:
                    continue
            vals = list(letter.vals)
            for var, value in t.assignments:
                vals[sys.var_index(var)] = value
            letters = list(config)
            letters[i] = Letter(t.target, tuple(vals), letter.marks)
            if t.sets_pointer is not None:
                letters = move_pointer(letters, t.sets_pointer, i)
            out.add(tuple(letters))
        for t in sys.loop_transitions:
            if t.origin != letter.loc:
                continue
            letters = list(config)
            letters[i] = letter.with_loc(t.name)
            first = letters[0]
            letters[0] = Letter(first.loc, first.vals,
                                first.marks | {(i, t.name)})
            out.add(tuple(letters))
    return out


def naive_reachable(sys, n, limit=None):
    from paratrap.semantics import initial_config

    seen = {initial_config(sys, n)}
    frontier = list(seen)
    while frontier:
        nxt = []
        for c in frontier:
            for s in naive_successors(sys, c):
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
                    if limit is not None and len(seen) > limit:
                        raise AssertionError("reachable set larger than expected")
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# random generators for property tests


def random_config(sys, n, rng):
    """A uniform-ish well-formed configuration."""
    states = list(sys.states)
    loops = [t.name for t in sys.loop_transitions]
    letters = []
    for _ in range(n):
        loc = rng.choice(states + loops)
        vals = tuple(rng.choice(v.values) for v in sys.variables)
        letters.append(Letter(loc, vals))
    marks = {}
    for i, lt in enumerate(letters):
        if lt.loc in loops:
            marks.setdefault(rng.randrange(n), set()).add((i, lt.loc))
    for p in sys.pointers:
        marks.setdefault(rng.randrange(n), set()).add(p.name)
    return tuple(
        Letter(lt.loc, lt.vals, frozenset(marks.get(i, ())))
        for i, lt in enumerate(letters)
    )


def random_powerword(sys, n, rng, density=0.15):
    from paratrap.semantics import slot_ids, slot_values

    cells = set()
    for j in range(n):
        for slot in slot_ids(sys, n):
            for value in slot_values(sys, slot):
                if rng.random() < density:
                    cells.add((j, slot, value))
    return Powerword(n, frozenset(cells))
