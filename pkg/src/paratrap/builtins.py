"""Bundled example systems.

``example21`` is the two-value flag algorithm used throughout the test
suite: an agent raises its flag, then walks over all agents and enters the
critical section only if every other agent it inspected had its flag down.

The remaining four are classic mutual exclusion algorithms from the
literature (Dijkstra, Knuth, de Bruijn, Eisenberg and McGuire).  They rely
on a shared turn index, which is modeled here with the global pointer
primitives (dereference test, grab, capture).  The pointer primitives
cannot express a "turn == me" test, so the turn handling is approximated
while the flag/scan structure that carries the safety argument is kept; the
models are best-effort renderings, not transcriptions.
"""

from __future__ import annotations

from .dsl import parse_system
from .model import ModelError, ParamSystem

_SOURCES = {
    # One boolean flag per agent.  Raise the flag, scan everyone, enter the
    # critical section only if the scan passed (an agent passes itself).
    "example21": """
system example21

states: initial loop break critical done
init: initial

var b : { true false } = false

local initial -> loop { b := true }
local break -> initial { b := false }
local critical -> done { }
local done -> initial { b := false }

looptrans tlp : loop [ self | b == false ] ? critical : break

property mutex : !atLeast(2, state=critical)
""",
    # Dijkstra's algorithm.  Stage one (spinning on the turn index) is
    # approximated: an agent may grab the turn when the current holder is
    # passive, or push on optimistically.  Stage two is faithful: lower c,
    # then verify no other agent has lowered theirs.
    "dijkstra": """
system dijkstra

states: ncs try grab scan back critical
init: ncs

var b : { true false } = true
var c : { true false } = true
pointer turn

local ncs -> try { b := false }
local try -> grab { } when turn.b == true set turn := self
local try -> grab { } when turn.b == false
local grab -> scan { c := false }
local back -> try { c := true }
local critical -> ncs { b := true, c := true }

looptrans checkc : scan [ self | c == true ] ? critical : back

property mutex : !atLeast(2, state=critical)
""",
    # Knuth's algorithm.  control in {zero, one, two}; an agent announces
    # with one, commits with two (grabbing the turn), and re-verifies that
    # it is the only committed agent before entering.
    "knuth": """
system knuth

states: ncs announce commit verify backoff critical
init: ncs

var control : { zero one two } = zero
pointer turn

local ncs -> announce { control := one }
local commit -> verify { control := two } set turn := self
local backoff -> announce { control := one }
local critical -> ncs { control := zero }

looptrans wait : announce [ self | !(control == two) ] ? commit : announce
looptrans recheck : verify [ self | !(control == two) ] ? critical : backoff

property mutex : !atLeast(2, state=critical)
""",
    # de Bruijn's variant of Knuth's algorithm: same announce/commit/verify
    # skeleton, but on exit the turn is handed to a still-waiting agent
    # (captured during a final scan) instead of being kept.
    "debruijn": """
system debruijn

states: ncs announce commit verify backoff critical handover
init: ncs

var control : { zero one two } = zero
pointer turn

local ncs -> announce { control := one }
local commit -> verify { control := two }
local backoff -> announce { control := one }
local critical -> handover { control := zero }

looptrans wait : announce [ self | !(control == two) ] ? commit : announce
looptrans recheck : verify [ self | !(control == two) ] ? critical : backoff
looptrans passturn : handover [ true ] ? ncs : ncs capture turn when control == one

property mutex : !atLeast(2, state=critical)
""",
    # Eisenberg and McGuire's algorithm: two scan phases.  First wait until
    # no agent is committed, then commit and re-verify; the successful agent
    # takes the turn on entry.
    "eisenberg_mcguire": """
system eisenberg_mcguire

states: ncs announce ready commit retreat takek critical
init: ncs

var control : { zero one two } = zero
pointer turn

local ncs -> announce { control := one }
local ready -> commit { control := two }
local retreat -> announce { control := one }
local takek -> critical { } set turn := self
local critical -> ncs { control := zero }

looptrans wait : announce [ self | !(control == two) ] ? ready : announce
looptrans recheck : commit [ self | !(control == two) ] ? takek : retreat

property mutex : !atLeast(2, state=critical)
""",
}


def builtin_names() -> list[str]:
    return sorted(_SOURCES)


def builtin(name: str) -> ParamSystem:
    """Return a bundled system by name."""
    if name not in _SOURCES:
        raise ModelError(
            f"no builtin system {name!r}; known: {', '.join(builtin_names())}")
    return parse_system(_SOURCES[name], source=f"builtin:{name}")


def builtin_source(name: str) -> str:
    if name not in _SOURCES:
        raise ModelError(
            f"no builtin system {name!r}; known: {', '.join(builtin_names())}")
    return _SOURCES[name].lstrip("\n")
