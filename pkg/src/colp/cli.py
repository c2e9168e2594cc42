"""Command-line front end: batch queries, a small REPL, semantics dumps
over finite universes, and engine-vs-oracle cross checks."""

from __future__ import annotations

import argparse
import sys
from typing import IO, Optional

from .engine import (BUDGET_EXHAUSTED, COMPLETE, FINITELY_FAILED, MODES,
                     PREFERENCES, STRATEGIES, Config, apply_mode, run_query)
from .parser import (SyntaxErrors, parse_program, parse_query, print_answer)
from .semantics import (Universe, UniverseError, compute_semantics,
                        regular_answers, universe_instantiations)

STATUS_LINES = {
    COMPLETE: "no (more) answers",
    FINITELY_FAILED: "failed",
    BUDGET_EXHAUSTED: "budget exhausted",
}

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_EXHAUSTED = 2
EXIT_ERROR = 3


def _report_syntax(err: IO[str], exc: SyntaxErrors) -> None:
    for issue in exc.issues:
        err.write(f"{exc.origin}:{issue.line}:{issue.col}: {issue.message}\n")


def _load_program(path: str, err: IO[str]):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        err.write(f"cannot read {path}: {e.strerror}\n")
        return None
    try:
        return parse_program(text, origin=path)
    except SyntaxErrors as exc:
        _report_syntax(err, exc)
        return None


def _load_universe(path: str, err: IO[str]) -> Optional[Universe]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        err.write(f"cannot read {path}: {e.strerror}\n")
        return None
    try:
        return Universe.from_text(text, origin=path)
    except (UniverseError, SyntaxErrors) as exc:
        if isinstance(exc, SyntaxErrors):
            _report_syntax(err, exc)
        else:
            err.write(f"{path}: {exc}\n")
        return None


def _config(args: argparse.Namespace, max_answers: Optional[int]) -> Config:
    return Config(mode=args.mode, strategy=args.strategy, budget=args.budget,
                  max_answers=max_answers, prefer=args.prefer)


def _flush_diagnostics(diagnostics: list[str], err: IO[str]) -> None:
    for line in diagnostics:
        err.write(line + "\n")


def cmd_run(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    prog = _load_program(args.program, err)
    if prog is None:
        return EXIT_ERROR
    try:
        query = parse_query(args.query)
    except SyntaxErrors as exc:
        _report_syntax(err, exc)
        return EXIT_ERROR

    cap = args.answers if args.answers is not None else 1
    trace = err if args.trace else None
    outcome = run_query(prog, query, _config(args, cap), trace=trace)
    shown = 0
    for answer in outcome.answers:
        out.write(print_answer(answer, query.variables) + "\n")
        shown += 1
    _flush_diagnostics(outcome.diagnostics, err)
    status = outcome.exhaustion
    if status is not None:
        out.write(STATUS_LINES[status] + "\n")
    if shown:
        return EXIT_OK
    if outcome.diagnostics:
        return EXIT_ERROR
    return EXIT_FAILED if status == FINITELY_FAILED else EXIT_EXHAUSTED


def cmd_repl(args: argparse.Namespace, inp: IO[str], out: IO[str],
             err: IO[str]) -> int:
    prog = _load_program(args.program, err)
    if prog is None:
        return EXIT_ERROR
    mode = args.mode
    budget = args.budget
    tracing = args.trace

    def directive(line: str) -> None:
        nonlocal mode, budget, tracing
        parts = line.split()
        name, rest = parts[0], parts[1:]
        if name == ":mode" and rest and rest[0] in MODES:
            mode = rest[0]
        elif name == ":budget" and rest and rest[0].isdigit() and int(rest[0]) >= 1:
            budget = int(rest[0])
        elif name == ":trace":
            tracing = rest[0] == "on" if rest else not tracing
        else:
            err.write(f"unknown directive: {line}\n")

    while True:
        out.write("?- ")
        out.flush()
        line = inp.readline()
        if not line:
            out.write("\n")
            return EXIT_OK
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            return EXIT_OK
        if line.startswith(":"):
            directive(line)
            continue
        try:
            query = parse_query(line)
        except SyntaxErrors as exc:
            _report_syntax(err, exc)
            continue
        cfg = Config(mode=mode, strategy=args.strategy, budget=budget,
                     prefer=args.prefer)
        outcome = run_query(prog, query, cfg, trace=err if tracing else None)
        stopped = False
        for answer in outcome.answers:
            out.write(print_answer(answer, query.variables) + "\n")
            reply = inp.readline()
            if not reply or reply.strip() != ";":
                stopped = True
                break
        _flush_diagnostics(outcome.diagnostics, err)
        if not stopped:
            out.write(STATUS_LINES[outcome.exhaustion] + "\n")


def cmd_semantics(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    prog = _load_program(args.program, err)
    universe = _load_universe(args.universe, err) if prog is not None else None
    if prog is None or universe is None:
        return EXIT_ERROR
    result = compute_semantics(apply_mode(prog, args.mode), universe)
    for label, atoms in (("Ind", result.ind), ("CoInd", result.coind),
                         ("Reg", result.reg)):
        names = sorted(universe.atom_str(a) for a in atoms)
        out.write(f"{label}: " + (", ".join(names) if names else "(empty)")
                  + "\n")
    for warning in result.warnings:
        err.write("warning: " + warning + "\n")
    return EXIT_OK


def _assignment_str(indexes: tuple[int, ...], query, universe: Universe) -> str:
    if not query.variables:
        return "true"
    pairs = zip(query.variables, indexes)
    return ", ".join(f"{v.display()} = {universe.display(i)}" for v, i in pairs)


def cmd_check(args: argparse.Namespace, out: IO[str], err: IO[str]) -> int:
    prog = _load_program(args.program, err)
    universe = _load_universe(args.universe, err) if prog is not None else None
    if prog is None or universe is None:
        return EXIT_ERROR
    try:
        query = parse_query(args.query)
    except SyntaxErrors as exc:
        _report_syntax(err, exc)
        return EXIT_ERROR

    applied = apply_mode(prog, args.mode)
    result = compute_semantics(applied, universe)
    expected = regular_answers(query, universe, result.reg)

    cap = args.answers if args.answers is not None else 16
    outcome = run_query(prog, query, _config(args, cap))
    covered: set = set()
    unsound: list[str] = []
    for answer in outcome.answers:
        insts = universe_instantiations(answer, query.variables, universe)
        covered |= insts
        for bad in sorted(insts - expected):
            rendered = print_answer(answer, query.variables).replace("\n", ", ")
            unsound.append(
                f"unsound: {rendered} instantiates to "
                f"{_assignment_str(bad, query, universe)} outside Reg")
    missing = [f"missing: {_assignment_str(sigma, query, universe)}"
               for sigma in sorted(expected - covered)]
    _flush_diagnostics(outcome.diagnostics, err)
    for line in unsound + missing:
        out.write(line + "\n")
    if unsound or missing:
        if outcome.exhaustion == BUDGET_EXHAUSTED:
            out.write("note: enumeration was budget exhausted\n")
        out.write("FAIL\n")
        return EXIT_FAILED
    out.write("PASS\n")
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--mode", choices=sorted(MODES), default="flexible")
    shared.add_argument("--strategy", choices=sorted(STRATEGIES),
                        default="iddfs")
    shared.add_argument("--budget", type=int, default=1000)
    shared.add_argument("--answers", type=int, default=None,
                        help="answer cap (default: 1 for run, 16 for check)")
    shared.add_argument("--prefer", choices=sorted(PREFERENCES),
                        default="cohyp")
    shared.add_argument("--trace", action="store_true")

    top = argparse.ArgumentParser(
        prog="colp",
        description="Logic programming with coclauses over rational terms.")
    sub = top.add_subparsers(dest="subcommand", required=True)

    p_run = sub.add_parser("run", parents=[shared],
                           help="answer one query against a program")
    p_run.add_argument("program")
    p_run.add_argument("query")

    p_repl = sub.add_parser("repl", parents=[shared],
                            help="interactive query loop")
    p_repl.add_argument("program")

    p_sem = sub.add_parser("semantics", parents=[shared],
                           help="inductive/coinductive/regular models over a "
                                "finite universe")
    p_sem.add_argument("program")
    p_sem.add_argument("universe")

    p_check = sub.add_parser("check", parents=[shared],
                             help="cross-check engine answers against the "
                                  "ground-semantics oracle")
    p_check.add_argument("program")
    p_check.add_argument("universe")
    p_check.add_argument("query")
    return top


def main(argv: Optional[list[str]] = None, stdin: Optional[IO[str]] = None,
         stdout: Optional[IO[str]] = None,
         stderr: Optional[IO[str]] = None) -> int:
    inp = stdin if stdin is not None else sys.stdin
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = build_arg_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else 0
    if args.budget < 1:
        err.write("--budget must be at least 1\n")
        return EXIT_ERROR
    if args.answers is not None and args.answers < 1:
        err.write("--answers must be at least 1\n")
        return EXIT_ERROR
    if args.subcommand == "run":
        return cmd_run(args, out, err)
    if args.subcommand == "repl":
        return cmd_repl(args, inp, out, err)
    if args.subcommand == "semantics":
        return cmd_semantics(args, out, err)
    return cmd_check(args, out, err)


def script_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    script_main()
