"""From finite-instance traps to size-independent trap languages.

A trap found at one instance size mentions concrete agent indices.  To talk
about every size at once we normalize: agents whose inspection-mark columns
are empty everywhere become anonymous and interchangeable, the few that are
actually tracked get stable names p0, p1, ...  A normalized trap is then a
word over set-valued letters, and repetition of equal anonymous letters can
be generalized into a star, giving a regular language of traps.

Generalization is justified by a pumping argument: once a run of equal
anonymous blank letters reaches the rendezvous degree of the system, the
run can be made arbitrarily longer without breaking the trap condition.
The abduction routine therefore checks candidate run lengths up to that
degree and keeps a star only when all of them pass, then re-checks every
word of the emitted language at a window of sizes as a final gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import ModelError, ParamSystem
from .semantics import Letter
from .traps import Powerword, is_trap_structural


@dataclass(frozen=True)
class NormLetter:
    """One position of a normalized trap: an optional agent name plus the
    value sets for every normalized slot, aligned with the slot list."""

    index: str | None
    entries: tuple


@dataclass(frozen=True)
class NormalizedTrap:
    slots: tuple
    names: tuple
    letters: tuple

    def __len__(self) -> int:
        return len(self.letters)


def _norm_slots(sys: ParamSystem, names) -> tuple:
    slots: list = ["loc"]
    slots.extend(sorted(v.name for v in sys.variables))
    for name in names:
        for t in sys.loop_transitions:
            slots.append((name, t.name))
    slots.extend(sorted(p.name for p in sys.pointers))
    return tuple(slots)


def normalize(sys: ParamSystem, pw: Powerword) -> NormalizedTrap:
    """Drop agents with all-empty mark columns, name the survivors p0, p1...
    in position order, and re-key their columns by name."""
    tracked = sorted({slot[0] for (_, slot, _) in pw.cells if isinstance(slot, tuple)})
    names = tuple(f"p{a}" for a in range(len(tracked)))
    name_of = {agent: names[a] for a, agent in enumerate(tracked)}
    slots = _norm_slots(sys, names)
    letters = []
    for j in range(pw.n):
        entries = []
        for slot in slots:
            if isinstance(slot, tuple):
                original = (tracked[names.index(slot[0])], slot[1])
                entries.append(pw.entry(j, original))
            else:
                entries.append(pw.entry(j, slot))
        letters.append(NormLetter(name_of.get(j), tuple(entries)))
    return NormalizedTrap(slots, names, tuple(letters))


def concretize(sys: ParamSystem, nt: NormalizedTrap) -> Powerword:
    """Back to a powerword over len(nt) agents, names pinned at the
    positions where they occur as indices."""
    position = {}
    for j, letter in enumerate(nt.letters):
        if letter.index is not None:
            if letter.index in position:
                raise ModelError(f"name {letter.index} indexed twice")
            position[letter.index] = j
    missing = [name for name in nt.names if name not in position]
    if missing:
        raise ModelError(f"names never placed: {missing}")
    cells = set()
    for j, letter in enumerate(nt.letters):
        for slot, entry in zip(nt.slots, letter.entries):
            key = (position[slot[0]], slot[1]) if isinstance(slot, tuple) else slot
            for value in entry:
                cells.add((j, key, value))
    return Powerword(len(nt.letters), frozenset(cells))


def validate_normalized(sys: ParamSystem, nt: NormalizedTrap) -> None:
    if nt.slots != _norm_slots(sys, nt.names):
        raise ModelError("slot list does not match the system and names")
    if len(set(nt.names)) != len(nt.names):
        raise ModelError("duplicate names")
    seen = [lt.index for lt in nt.letters if lt.index is not None]
    if sorted(seen) != sorted(nt.names) or len(seen) != len(set(seen)):
        raise ModelError("each name must index exactly one letter")
    for lt in nt.letters:
        if len(lt.entries) != len(nt.slots):
            raise ModelError("letter entry count does not match slots")


def mark_condition_warnings(sys: ParamSystem, nt: NormalizedTrap) -> list:
    """Named agents are supposed to be the ones whose inspection marks the
    trap tracks.  The strict reading wants a mark entry for every named
    (agent, loop) column; in practice traps often track one loop per name.
    Returns a note per strict miss, and flags names with no marks at all."""
    notes = []
    for name in nt.names:
        marked_loops = 0
        for s, slot in enumerate(nt.slots):
            if isinstance(slot, tuple) and slot[0] == name:
                if any(lt.entries[s] for lt in nt.letters):
                    marked_loops += 1
                else:
                    notes.append(f"{name}: column {slot[0]}.{slot[1]} empty")
        if marked_loops == 0:
            notes.append(f"{name}: no mark column populated at all")
    return notes


# ---------------------------------------------------------------------------
# word surgery on configurations and powerwords


def move_marks_left(sys: ParamSystem, config, k: int, targets):
    """Shift the inspection or pointer marks named in ``targets`` from
    letter k onto letter k-1 (merging with whatever is there)."""
    return _shift_marks(config, k, k - 1, targets)


def move_marks_right(sys: ParamSystem, config, k: int, targets):
    return _shift_marks(config, k, k + 1, targets)


def _shift_marks(config, k: int, dst: int, targets):
    if not (0 <= k < len(config)) or not (0 <= dst < len(config)):
        raise ModelError("mark move out of range")
    moved = set()
    for mark in config[k].marks:
        kind = mark[1] if isinstance(mark, tuple) else mark
        if kind in targets:
            moved.add(mark)
    if not moved:
        return tuple(config)
    letters = list(config)
    letters[k] = Letter(letters[k].loc, letters[k].vals,
                        letters[k].marks - moved)
    letters[dst] = Letter(letters[dst].loc, letters[dst].vals,
                          letters[dst].marks | moved)
    return tuple(letters)


def drop_letter(sys: ParamSystem, config, k: int):
    """Remove letter k from a configuration: its column disappears, its
    inspection-mark rows disappear, higher agents shift down by one."""
    if not (0 <= k < len(config)):
        raise ModelError("drop position out of range")
    letters = []
    for j, letter in enumerate(config):
        if j == k:
            continue
        marks = set()
        for mark in letter.marks:
            if isinstance(mark, tuple):
                i, t = mark
                if i == k:
                    continue
                marks.add((i - 1, t) if i > k else mark)
            else:
                marks.add(mark)
        letters.append(Letter(letter.loc, letter.vals, frozenset(marks)))
    return tuple(letters)


def drop_agent(sys: ParamSystem, pw: Powerword, k: int) -> Powerword:
    """The powerword analogue of drop_letter."""
    if not (0 <= k < pw.n):
        raise ModelError("drop position out of range")
    cells = set()
    for (j, slot, value) in pw.cells:
        if j == k:
            continue
        jj = j - 1 if j > k else j
        if isinstance(slot, tuple):
            i, t = slot
            if i == k:
                continue
            slot = (i - 1, t) if i > k else slot
        cells.add((jj, slot, value))
    return Powerword(pw.n - 1, frozenset(cells))


# ---------------------------------------------------------------------------
# pumping


def rendezvous_degree(sys: ParamSystem) -> int:
    """Run length after which one more equal anonymous letter never hurts:
    an occurrence touches at most the acting agent, its inspectee and the
    pointer targets, so a long enough run always has an untouched letter
    that can stand in for an inserted copy."""
    return 3 + len(sys.pointers)


def pump(nt: NormalizedTrap, i: int, k: int, degree: int = 3) -> NormalizedTrap:
    """Insert k-1 copies of letter i, valid when letters i..i+degree-1 are
    equal and anonymous.  k = 1 returns the word unchanged."""
    if k < 1:
        raise ModelError("pump count must be at least 1")
    if i < 0 or i + degree > len(nt.letters):
        raise ModelError("pump window out of range")
    window = nt.letters[i:i + degree]
    if any(lt != window[0] for lt in window):
        raise ModelError("pump window letters differ")
    if window[0].index is not None:
        raise ModelError("pump window letters must be anonymous")
    letters = nt.letters[:i] + (window[0],) * (k - 1) + nt.letters[i:]
    return NormalizedTrap(nt.slots, nt.names, letters)


# ---------------------------------------------------------------------------
# trap languages


@dataclass(frozen=True)
class Token:
    letter: NormLetter
    star: bool


@dataclass(frozen=True)
class TrapLanguage:
    slots: tuple
    names: tuple
    tokens: tuple

    @property
    def min_length(self) -> int:
        return sum(1 for tok in self.tokens if not tok.star)


def validate_language(sys: ParamSystem, lang: TrapLanguage) -> None:
    if lang.slots != _norm_slots(sys, lang.names):
        raise ModelError("slot list does not match the system and names")
    for tok in lang.tokens:
        if len(tok.letter.entries) != len(lang.slots):
            raise ModelError("token entry count does not match slots")
        if tok.star and tok.letter.index is not None:
            raise ModelError("starred letters must be anonymous")
    for a, b in zip(lang.tokens, lang.tokens[1:]):
        if a.star and b.star:
            raise ModelError("adjacent stars are ambiguous, merge them")
    placed = [tok.letter.index for tok in lang.tokens
              if tok.letter.index is not None]
    if sorted(placed) != sorted(lang.names):
        raise ModelError("each name must index exactly one token")


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def count_words(lang: TrapLanguage, length: int) -> int:
    stars = sum(1 for tok in lang.tokens if tok.star)
    extra = length - lang.min_length
    if extra < 0:
        return 0
    if stars == 0:
        return 1 if extra == 0 else 0
    return math.comb(extra + stars - 1, stars - 1)


def words_of(lang: TrapLanguage, length: int):
    """All words of the language with exactly ``length`` letters, as
    normalized traps, in deterministic order."""
    stars = sum(1 for tok in lang.tokens if tok.star)
    extra = length - lang.min_length
    if extra < 0:
        return
    if stars == 0 and extra > 0:
        return
    for counts in _compositions(extra, stars):
        letters = []
        ci = 0
        for tok in lang.tokens:
            if tok.star:
                letters.extend([tok.letter] * counts[ci])
                ci += 1
            else:
                letters.append(tok.letter)
        yield NormalizedTrap(lang.slots, lang.names, tuple(letters))


# ---------------------------------------------------------------------------
# abduction


def _maximal_runs(letters) -> list:
    runs = []
    i = 0
    while i < len(letters):
        j = i
        if letters[i].index is None:
            while j < len(letters) and letters[j] == letters[i]:
                j += 1
        if j - i >= 2:
            runs.append((i, j - i))
        i = max(j, i + 1)
    return runs


def _with_run(nt: NormalizedTrap, start: int, length: int, m: int):
    letters = (nt.letters[:start] + (nt.letters[start],) * m
               + nt.letters[start + length:])
    return NormalizedTrap(nt.slots, nt.names, letters)


def _run_floor(sys, nt, start, length, degree):
    passes = {}
    for m in range(1, degree + 1):
        word = _with_run(nt, start, length, m)
        passes[m] = is_trap_structural(sys, concretize(sys, word))
    floor = None
    for m in range(degree, 0, -1):
        if not passes[m]:
            break
        floor = m
    return floor


def _build_language(nt, runs, floors) -> TrapLanguage:
    tokens = []
    run_at = {start: (length, floors.get(ridx))
              for ridx, (start, length) in enumerate(runs)}
    j = 0
    while j < len(nt.letters):
        if j in run_at:
            length, floor = run_at[j]
            if floor is None:
                tokens.extend(Token(nt.letters[j], False) for _ in range(length))
            else:
                tokens.extend(Token(nt.letters[j], False) for _ in range(floor))
                tokens.append(Token(nt.letters[j], True))
            j += length
        else:
            tokens.append(Token(nt.letters[j], False))
            j += 1
    return TrapLanguage(nt.slots, nt.names, tuple(tokens))


def _gate(sys, nt, lang, max_words) -> bool:
    checked = 0
    top = max(len(nt.letters) + 3, lang.min_length + 3)
    for size in range(max(lang.min_length, 1), top + 1):
        for word in words_of(lang, size):
            checked += 1
            if checked > max_words:
                return True
            if not is_trap_structural(sys, concretize(sys, word)):
                return False
    return True


def abduct(sys: ParamSystem, nt: NormalizedTrap, degree: int | None = None,
           max_gate_words: int = 5000, max_names: int = 4):
    """Generalize runs of equal anonymous letters into stars.

    For each maximal run of length at least 2, candidate run lengths
    1..degree are tried; the run becomes ``letter^floor Star(letter)`` for
    the smallest floor from which every length up to the degree passes the
    structural trap check.  Every word of the resulting language up to a
    few sizes beyond the source word is re-checked; on failure stars are
    retracted right to left.  Returns None when nothing generalizes, or
    when the trap names more than max_names agents.
    """
    if len(nt.names) > max_names:
        return None
    if degree is None:
        degree = rendezvous_degree(sys)
    runs = _maximal_runs(nt.letters)
    floors = {}
    for ridx, (start, length) in enumerate(runs):
        floor = _run_floor(sys, nt, start, length, degree)
        if floor is not None:
            floors[ridx] = floor
    while floors:
        lang = _build_language(nt, runs, floors)
        if _gate(sys, nt, lang, max_gate_words):
            return lang
        floors.pop(max(floors))
    return None


def language_key(lang: TrapLanguage):
    """Hashable identity for deduplication across instance sizes."""
    return (lang.slots, lang.names,
            tuple((tok.letter.index, tok.letter.entries, tok.star)
                  for tok in lang.tokens))


# ---------------------------------------------------------------------------
# serialization and rendering


def _norm_slot_label(slot) -> str:
    return f"{slot[0]}.{slot[1]}" if isinstance(slot, tuple) else slot


def _norm_slot_from_label(label: str, names):
    head, dot, tail = label.partition(".")
    if dot and head in names:
        return (head, tail)
    return label


def _letter_to_json(slots, letter: NormLetter) -> dict:
    entries = {}
    for slot, entry in zip(slots, letter.entries):
        if entry:
            entries[_norm_slot_label(slot)] = sorted(entry)
    out = {"entries": entries}
    if letter.index is not None:
        out["index"] = letter.index
    return out


def _letter_from_json(slots, data) -> NormLetter:
    labels = {_norm_slot_label(s): i for i, s in enumerate(slots)}
    entries = [frozenset() for _ in slots]
    for label, values in data.get("entries", {}).items():
        if label not in labels:
            raise ModelError(f"unknown slot label {label!r}")
        entries[labels[label]] = frozenset(values)
    return NormLetter(data.get("index"), tuple(entries))


def normalized_to_json(nt: NormalizedTrap) -> dict:
    return {
        "names": list(nt.names),
        "slots": [_norm_slot_label(s) for s in nt.slots],
        "letters": [_letter_to_json(nt.slots, lt) for lt in nt.letters],
    }


def normalized_from_json(sys: ParamSystem, data) -> NormalizedTrap:
    names = tuple(data["names"])
    slots = _norm_slots(sys, names)
    got = [_norm_slot_from_label(s, names) for s in data["slots"]]
    if tuple(got) != slots:
        raise ModelError("slot list in json does not match the system")
    letters = tuple(_letter_from_json(slots, lt) for lt in data["letters"])
    nt = NormalizedTrap(slots, names, letters)
    validate_normalized(sys, nt)
    return nt


def language_to_json(lang: TrapLanguage) -> dict:
    tokens = []
    for tok in lang.tokens:
        entry = _letter_to_json(lang.slots, tok.letter)
        entry["star"] = tok.star
        tokens.append(entry)
    return {
        "names": list(lang.names),
        "slots": [_norm_slot_label(s) for s in lang.slots],
        "tokens": tokens,
    }


def language_from_json(sys: ParamSystem, data) -> TrapLanguage:
    names = tuple(data["names"])
    slots = _norm_slots(sys, names)
    got = [_norm_slot_from_label(s, names) for s in data["slots"]]
    if tuple(got) != slots:
        raise ModelError("slot list in json does not match the system")
    tokens = tuple(
        Token(_letter_from_json(slots, tok), bool(tok.get("star", False)))
        for tok in data["tokens"]
    )
    lang = TrapLanguage(slots, names, tokens)
    validate_language(sys, lang)
    return lang


def _format_columns(slots, columns, headers) -> str:
    rows = [("", headers)]
    for s, slot in enumerate(slots):
        cells = []
        for col in columns:
            entry = sorted(col.entries[s])
            cells.append("{" + ",".join(entry) + "}" if entry else "∅")
        rows.append((_norm_slot_label(slot), cells))
    label_w = max(len(label) for label, _ in rows)
    col_w = [max(len(rows[r][1][j]) for r in range(len(rows)))
             for j in range(len(columns))]
    lines = []
    for label, cells in rows:
        lines.append(label.rjust(label_w) + "  "
                     + "  ".join(c.rjust(col_w[j]) for j, c in enumerate(cells)))
    return "\n".join(lines)


def format_normalized(nt: NormalizedTrap) -> str:
    headers = [lt.index if lt.index is not None else "." for lt in nt.letters]
    return _format_columns(nt.slots, nt.letters, headers)


def format_language(lang: TrapLanguage) -> str:
    headers = []
    for tok in lang.tokens:
        name = tok.letter.index if tok.letter.index is not None else "."
        headers.append(name + "*" if tok.star else name)
    return _format_columns(lang.slots, [tok.letter for tok in lang.tokens],
                           headers)
