"""Command line front end.

Subcommands:
  verify      full pipeline: refine traps per size, abduct languages,
              discharge the parameterized check with a prover
  explore     explicit-state property check at fixed instance sizes
  emit-tptp   write the first-order problems for given trap languages
  check-trap  test a powerword against the structural trap condition
  abduct      generalize a finite trap into a trap language

Exit codes: 0 property proved (or trap confirmed), 1 not proved or
violated, 2 usage error, 3 environment error (missing prover, bad paths).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys as _sys
import time
from dataclasses import dataclass, field

from . import abduction, folcheck, traps
from .builtins import builtin, builtin_names
from .dsl import ParseError, parse_system
from .model import ModelError, ParamSystem
from .semantics import check_property_explicit, format_trace, trace_to_json

EXIT_PROVED = 0
EXIT_NOT_PROVED = 1
EXIT_USAGE = 2
EXIT_ENVIRONMENT = 3

REPORT_FORMAT = 1


def load_system(ref: str) -> ParamSystem:
    if ref.startswith("builtin:"):
        name = ref.split(":", 1)[1]
        try:
            return builtin(name)
        except KeyError:
            raise ModelError(
                f"no builtin {name!r}; available: {', '.join(builtin_names())}"
            )
    with open(ref, "r", encoding="utf-8") as handle:
        return parse_system(handle.read(), source=ref)


def resolve_property(sys: ParamSystem, name: str | None):
    if name is not None:
        for p in sys.properties:
            if p[0] == name:
                return p
        raise ModelError(f"system declares no property {name!r}")
    if len(sys.properties) == 1:
        return sys.properties[0]
    for p in sys.properties:
        if p[0] == "mutex":
            return p
    raise ModelError("several properties declared, pick one with --property")


def parse_sizes(text: str) -> list[int]:
    out = []
    try:
        for chunk in text.split(","):
            chunk = chunk.strip()
            for sep in ("..", "-"):
                if sep in chunk:
                    lo, hi = chunk.split(sep, 1)
                    out.extend(range(int(lo), int(hi) + 1))
                    break
            else:
                out.append(int(chunk))
    except ValueError:
        raise ModelError(f"bad size list {text!r}")
    if not out or any(n < 1 for n in out):
        raise ModelError(f"bad size list {text!r}")
    return sorted(set(out))


# ---------------------------------------------------------------------------
# verify


@dataclass
class SizeStats:
    n: int
    verdict: str
    iterations: int
    traps: int
    new_languages: int
    seconds: float


@dataclass
class VerificationReport:
    system: str
    property_name: str
    overall: str = "not_proved"
    sizes: list = field(default_factory=list)
    languages: list = field(default_factory=list)
    inductivity: dict | None = None
    notes: list = field(default_factory=list)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "system": self.system,
            "property": self.property_name,
            "overall": self.overall,
            "sizes": [
                {"n": s.n, "verdict": s.verdict, "iterations": s.iterations,
                 "traps": s.traps, "new_languages": s.new_languages,
                 "seconds": round(s.seconds, 3)}
                for s in self.sizes
            ],
            "languages": self.languages,
            "inductivity": self.inductivity,
            "notes": self.notes,
            "seconds": round(self.seconds, 3),
        }

    def render(self) -> str:
        lines = [f"system {self.system}, property {self.property_name}"]
        if self.sizes:
            lines.append("  size  verdict  iterations  traps  new-languages   time")
            for s in self.sizes:
                lines.append(
                    f"  {s.n:>4}  {s.verdict:<7}  {s.iterations:>10}"
                    f"  {s.traps:>5}  {s.new_languages:>13}  {s.seconds:>5.1f}s"
                )
        lines.append(f"trap languages: {len(self.languages)}")
        if self.inductivity is not None:
            lines.append(f"inductivity: {self.inductivity['overall']}")
            for p in self.inductivity["problems"]:
                lines.append(f"    {p['name']:<40} {p['status']}")
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"overall: {self.overall}  ({self.seconds:.1f}s)")
        return "\n".join(lines)


def cmd_verify(args) -> int:
    system = load_system(args.model)
    prop_name, prop = resolve_property(system, args.property)
    sizes = parse_sizes(args.sizes)
    out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    if args.emit_cnf:
        os.makedirs(args.emit_cnf, exist_ok=True)
    prover = folcheck.prover_command(args.prover, args.prover_timeout)

    report = VerificationReport(system.name, prop_name)
    started = time.monotonic()
    languages = []
    seen_keys = set()
    stop = False

    for n in sizes:
        size_start = time.monotonic()
        result = traps.cegar(
            system, n, prop,
            max_iterations=args.max_iterations,
            assume_property=not args.no_assume_property,
            dump_dir=args.emit_cnf,
        )
        fresh = 0
        if result.verdict == "proved":
            for trap in result.traps:
                lang = abduction.abduct(system, abduction.normalize(system, trap))
                if lang is None:
                    continue
                key = abduction.language_key(lang)
                if key not in seen_keys:
                    seen_keys.add(key)
                    languages.append(lang)
                    fresh += 1
        report.sizes.append(SizeStats(
            n, result.verdict, result.iterations, len(result.traps),
            fresh, time.monotonic() - size_start,
        ))
        if result.initial_violation:
            report.notes.append(f"initial configuration violates the property at n={n}")
            report.overall = "not_proved"
            stop = True
        elif result.verdict != "proved":
            if result.capped:
                report.notes.append(
                    f"n={n}: refinement stopped after {args.max_iterations} iterations")
            else:
                report.notes.append(
                    f"n={n}: a counterexample step admits no excluding trap")
            report.overall = "not_proved"
            stop = True
        if stop:
            break
        if not languages:
            report.notes.append(f"n={n}: no trap language abducted yet")
            continue
        ind = folcheck.check_inductivity(
            system, languages, prop, os.path.join(out_dir, "tptp"),
            prover=prover, timeout=args.prover_timeout,
            assume_property=not args.no_assume_property,
            size_floor=args.size_floor,
        )
        report.inductivity = ind.to_json()
        if ind.overall == "proved":
            report.overall = "proved"
            break
        if ind.overall == "prover_unavailable":
            report.overall = "prover_unavailable"
            report.notes.append(
                "no first-order prover found; problems were written, set "
                "PARATRAP_PROVER or --prover to discharge them")
            break

    report.languages = [abduction.language_to_json(lang) for lang in languages]
    report.seconds = time.monotonic() - started

    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    with open(os.path.join(out_dir, "languages.json"), "w", encoding="utf-8") as fh:
        json.dump({"system": system.name, "languages": report.languages},
                  fh, indent=2, ensure_ascii=False)
        fh.write("\n")

    if args.json:
        print(json.dumps(report.to_json(), indent=2, ensure_ascii=False))
    else:
        print(report.render())
        for lang in languages:
            print()
            print(abduction.format_language(lang))

    if report.overall == "proved":
        return EXIT_PROVED
    if report.overall == "prover_unavailable":
        return EXIT_ENVIRONMENT
    return EXIT_NOT_PROVED


# ---------------------------------------------------------------------------
# explore


def cmd_explore(args) -> int:
    system = load_system(args.model)
    prop_name, prop = resolve_property(system, args.property)
    sizes = parse_sizes(args.sizes)
    worst = EXIT_PROVED
    payload = []
    for n in sizes:
        result = check_property_explicit(system, n, prop, bound=args.bound)
        entry = {
            "n": n,
            "verdict": result.verdict,
            "explored": result.explored,
            "truncated": result.truncated,
        }
        if result.violation is not None:
            entry["trace"] = trace_to_json(system, result.violation)
        payload.append(entry)
        if result.verdict != "holds":
            worst = EXIT_NOT_PROVED
        if not args.json:
            note = " (truncated)" if result.truncated else ""
            print(f"n={n}: {prop_name} {result.verdict}, "
                  f"{result.explored} configurations{note}")
            if result.violation is not None and args.trace:
                print(format_trace(system, result.violation))
    if args.json:
        print(json.dumps({"system": system.name, "property": prop_name,
                          "results": payload}, indent=2, ensure_ascii=False))
    return worst


# ---------------------------------------------------------------------------
# emit-tptp


def cmd_emit_tptp(args) -> int:
    system = load_system(args.model)
    prop_name, prop = resolve_property(system, args.property)
    languages = []
    for path in args.language or []:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        entries = data["languages"] if isinstance(data, dict) and "languages" in data \
            else [data]
        for entry in entries:
            languages.append(abduction.language_from_json(system, entry))
    problems = folcheck.inductivity_problems(
        system, languages, prop,
        assume_property=not args.no_assume_property,
        size_floor=args.size_floor,
    )
    os.makedirs(args.out, exist_ok=True)
    for problem in problems:
        path = os.path.join(args.out, f"{problem.name}.p")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(folcheck.emit_tptp(problem))
        print(path)
    return EXIT_PROVED


# ---------------------------------------------------------------------------
# check-trap


def cmd_check_trap(args) -> int:
    system = load_system(args.model)
    with open(args.trap, "r", encoding="utf-8") as fh:
        pw = traps.powerword_from_json(system, json.load(fh))
    ok, violated = traps.is_trap_structural(system, pw, explain=True)
    if not args.quiet:
        print(traps.format_powerword(system, pw))
        if ok:
            print(f"structural trap over {pw.n} agents")
        else:
            print(f"not a trap: {violated.origin}")
    if ok and args.exact:
        exact = traps.is_trap_exact(system, pw)
        if not args.quiet:
            print(f"exact check: {'trap' if exact else 'not a trap'}")
        ok = ok and exact
    return EXIT_PROVED if ok else EXIT_NOT_PROVED


# ---------------------------------------------------------------------------
# abduct


def cmd_abduct(args) -> int:
    system = load_system(args.model)
    with open(args.trap, "r", encoding="utf-8") as fh:
        pw = traps.powerword_from_json(system, json.load(fh))
    nt = abduction.normalize(system, pw)
    lang = abduction.abduct(system, nt, degree=args.degree)
    if lang is None:
        print("no repetition generalizes; the trap stays finite", file=_sys.stderr)
        return EXIT_NOT_PROVED
    data = abduction.language_to_json(lang)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
    if args.json:
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(abduction.format_language(lang))
    return EXIT_PROVED


# ---------------------------------------------------------------------------
# argument parsing


def _add_model(p):
    p.add_argument("--model", required=True,
                   help="path to a system file, or builtin:<name>")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paratrap",
        description="parameterized safety verification with trap invariants",
    )
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for anything randomized (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="prove the property for all sizes")
    _add_model(v)
    v.add_argument("--property", default=None)
    v.add_argument("--sizes", default="2..8",
                   help="instance sizes to refine at, e.g. 2..8 or 3,5")
    v.add_argument("--max-iterations", type=int, default=50)
    v.add_argument("--prover", default=None,
                   help="prover command line (default: PARATRAP_PROVER or PATH)")
    v.add_argument("--prover-timeout", type=int, default=60)
    v.add_argument("--out", default="paratrap_out")
    v.add_argument("--emit-cnf", default=None, metavar="DIR",
                   help="also dump the DIMACS instances of the refinement")
    v.add_argument("--no-assume-property", action="store_true",
                   help="drop the property precondition from both checks")
    v.add_argument("--size-floor", type=int, default=None,
                   help="assume at least this many agents in the prover problems")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("explore", help="explicit check at fixed sizes")
    _add_model(e)
    e.add_argument("--property", default=None)
    e.add_argument("--sizes", default="2..4")
    e.add_argument("--bound", type=int, default=1_000_000,
                   help="stop after this many configurations")
    e.add_argument("--trace", action="store_true",
                   help="print a violating run if found")
    e.add_argument("--json", action="store_true")
    e.set_defaults(func=cmd_explore)

    t = sub.add_parser("emit-tptp", help="write first-order problems")
    _add_model(t)
    t.add_argument("--property", default=None)
    t.add_argument("--language", action="append", metavar="FILE",
                   help="trap language json (repeatable)")
    t.add_argument("--out", default="paratrap_tptp")
    t.add_argument("--no-assume-property", action="store_true")
    t.add_argument("--size-floor", type=int, default=None)
    t.set_defaults(func=cmd_emit_tptp)

    c = sub.add_parser("check-trap", help="test a powerword")
    _add_model(c)
    c.add_argument("--trap", required=True, metavar="FILE")
    c.add_argument("--exact", action="store_true",
                   help="also run the exhaustive semantic check")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=cmd_check_trap)

    a = sub.add_parser("abduct", help="generalize a trap into a language")
    _add_model(a)
    a.add_argument("--trap", required=True, metavar="FILE")
    a.add_argument("--degree", type=int, default=None)
    a.add_argument("--out", default=None, metavar="FILE")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_abduct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    random.seed(args.seed)
    try:
        return args.func(args)
    except (ParseError, ModelError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: malformed json input: {exc}", file=_sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_ENVIRONMENT


if __name__ == "__main__":
    raise SystemExit(main())
