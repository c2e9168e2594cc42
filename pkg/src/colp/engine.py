"""Resolution engine for programs with coclauses.

A goal is a stack of frames, each an atom with its own set of coinductive
hypotheses.  Three moves resolve the leftmost frame:

  empty   the stack is empty: succeed with the current equations.
  step    unify the atom with a renamed clause head; push the body atoms,
          each carrying the atom as an extra hypothesis; the frames to the
          right keep their old hypotheses.
  co-hyp  unify the atom with one of its hypotheses, then re-derive the atom
          by standard resolution over clauses plus coclauses (no coclause
          move inside, empty hypotheses); the frames to the right continue
          under the resulting equations.

step and co-hyp each consume one unit of budget, shared along the whole
derivation including the inner re-derivations.  Builtins are free and are
never hypotheses.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import IO, Iterator, Optional

from .equations import (SolvedForm, EMPTY_SOLVED, RationalTerm, arg_equations,
                        bisimilar, canonical_key, is_ground_under,
                        rational_value, solve)
from .parser import Query, atom_snapshot
from .terms import (Atom, Clause, Num, Program, Term, Var, fresh_rename,
                    is_builtin, vars_of)

MODES = ("flexible", "inductive", "coinductive")
STRATEGIES = ("dfs", "iddfs")
PREFERENCES = ("cohyp", "step")

FINITELY_FAILED = "finitely-failed"
BUDGET_EXHAUSTED = "budget-exhausted"
COMPLETE = "complete"


class BuiltinTypeError(Exception):
    """A builtin was applied to arguments outside its contract.

    Distinct from failure: the branch is aborted and a diagnostic recorded,
    so a run that only type-errors is not reported as finitely failed.
    """


@dataclass(frozen=True)
class Config:
    mode: str = "flexible"
    strategy: str = "iddfs"
    budget: int = 1000
    max_answers: Optional[int] = None
    prefer: str = "cohyp"
    check_invariants: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.prefer not in PREFERENCES:
            raise ValueError(f"unknown preference {self.prefer!r}")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.max_answers is not None and self.max_answers < 1:
            raise ValueError("max_answers must be at least 1")


class Outcome:
    """Lazy answer stream plus, once the stream has been drained, how the
    search ended.  exhaustion stays None while answers remain unpulled or
    when the stream was cut off by max_answers."""

    def __init__(self, answers: Iterator[SolvedForm], diagnostics: list[str],
                 cell: dict):
        self.answers = answers
        self.diagnostics = diagnostics
        self._cell = cell

    @property
    def exhaustion(self) -> Optional[str]:
        return self._cell.get("exhaustion")


def apply_mode(prog: Program, mode: str) -> Program:
    """inductive drops the coclauses; coinductive replaces them with one
    universal cofact per predicate signature used by the clauses."""
    if mode == "inductive":
        return Program(prog.clauses, ())
    if mode == "coinductive":
        sigs: list[tuple[str, int]] = []
        for cl in prog.clauses:
            for atom in (cl.head, *cl.body):
                sig = (atom.pred, len(atom.args))
                if not is_builtin(atom) and sig not in sigs:
                    sigs.append(sig)
        cofacts = tuple(
            Clause(Atom(p, tuple(Var(f"A{i + 1}", 0) for i in range(n))), ())
            for p, n in sigs)
        return Program(prog.clauses, cofacts)
    return prog


@dataclass(frozen=True, slots=True)
class Frame:
    atom: Atom
    hyps: tuple[Atom, ...]  # insertion order, duplicates collapsed
    inner: bool             # inside a co-hyp re-derivation
    depth: int


# arithmetic accepted on the right of is/2 and on both sides of comparisons
_ARITH2 = {"+", "-", "*", "max", "min"}


def _arith(t: Term, solved: SolvedForm, active: set) -> int:
    t = solved.walk(t)
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Var):
        raise BuiltinTypeError(f"unbound variable {t.display()} in arithmetic")
    if t in active:
        raise BuiltinTypeError("cyclic arithmetic expression")
    active.add(t)
    try:
        if len(t.args) == 1 and t.functor == "-":
            return -_arith(t.args[0], solved, active)
        if len(t.args) == 2 and t.functor in _ARITH2:
            x = _arith(t.args[0], solved, active)
            y = _arith(t.args[1], solved, active)
            return {"+": lambda: x + y, "-": lambda: x - y,
                    "*": lambda: x * y, "max": lambda: max(x, y),
                    "min": lambda: min(x, y)}[t.functor]()
        raise BuiltinTypeError(f"not arithmetic: {t.functor}/{len(t.args)}")
    finally:
        active.discard(t)


def eval_builtin(atom: Atom, solved: SolvedForm) -> Optional[SolvedForm]:
    """None means the branch fails; BuiltinTypeError means it is aborted."""
    pred = atom.pred
    if pred == "true":
        return solved
    a, b = atom.args
    if pred == "=":
        return solve([(a, b)], solved)
    if pred == "\\=":
        if not (is_ground_under(solved, a) and is_ground_under(solved, b)):
            raise BuiltinTypeError("\\= needs ground arguments")
        same = bisimilar(rational_value(solved, a), rational_value(solved, b))
        return None if same else solved
    if pred == "is":
        value = _arith(b, solved, set())
        return solve([(a, Num(value))], solved)
    x = _arith(a, solved, set())
    y = _arith(b, solved, set())
    holds = {"<": x < y, ">": x > y, "=<": x <= y, ">=": x >= y}[pred]
    return solved if holds else None


class _Run:
    """One depth-first sweep at a fixed budget."""

    def __init__(self, prog: Program, budget: int, prefer: str,
                 diagnostics: list[str], trace: Optional[IO[str]],
                 check_invariants: bool):
        self.budget = budget
        self.prefer = prefer
        self.diagnostics = diagnostics
        self.trace = trace
        self.check = check_invariants
        self.pruned = False
        self.fresh = itertools.count(1)
        self.has_co = bool(prog.coclauses)
        named = [(f"c{i + 1}", cl) for i, cl in enumerate(prog.clauses)]
        named += [(f"co{i + 1}", cl) for i, cl in enumerate(prog.coclauses)]
        self.outer: dict[tuple[str, int], list] = {}
        self.inner: dict[tuple[str, int], list] = {}
        for cid, cl in named:
            sig = (cl.head.pred, len(cl.head.args))
            self.inner.setdefault(sig, []).append((cid, cl))
            if not cid.startswith("co"):
                self.outer.setdefault(sig, []).append((cid, cl))

    def _tline(self, depth: int, text: str) -> None:
        if self.trace is not None:
            self.trace.write("  " * depth + text + "\n")

    def _diag(self, message: str) -> None:
        if message not in self.diagnostics:
            self.diagnostics.append(message)

    def _candidates(self, frame: Frame, solved: SolvedForm) -> list[tuple]:
        atom = frame.atom
        sig = (atom.pred, len(atom.args))
        table = self.inner if frame.inner else self.outer
        steps = [("step", cid, cl) for cid, cl in table.get(sig, ())]
        cohyps = []
        if self.has_co and not frame.inner:
            seen = set()
            for h in frame.hyps:
                if (h.pred, len(h.args)) == sig and h not in seen:
                    seen.add(h)
                    cohyps.append(("cohyp", h))
        if self.prefer == "cohyp":
            return cohyps + steps
        return steps + cohyps

    def solve_frames(self, frames: tuple[Frame, ...], solved: SolvedForm,
                     used: int) -> Iterator[tuple[SolvedForm, int]]:
        """Depth-first backtracking over an explicit stack of pending states,
        so derivation length is bounded by the budget, not the interpreter's
        recursion limit.  Yields (equations, budget consumed) per success."""
        stack: list[tuple] = [(frames, solved, used, None)]
        while stack:
            frames, solved, used, note = stack.pop()
            if note is not None:
                self._tline(note[0], note[1])
            if not frames:
                self._tline(0, "EMPTY")
                yield solved, used
                continue
            frame, rest = frames[0], frames[1:]
            atom = frame.atom

            if is_builtin(atom):
                try:
                    after = eval_builtin(atom, solved)
                except BuiltinTypeError as e:
                    self._diag(f"type error: {e} in {atom_snapshot(atom, solved)}")
                    continue
                if after is not None:
                    stack.append((rest, after, used, None))
                continue

            alts = []
            for cand in self._candidates(frame, solved):
                if cand[0] == "step":
                    cid, clause = cand[1], cand[2]
                    renamed = fresh_rename(clause, self.fresh)
                    after = solve(arg_equations(atom, renamed.head), solved)
                    if after is None:
                        continue
                    if frame.inner:
                        hyps: tuple[Atom, ...] = ()
                    else:
                        hyps = (frame.hyps if atom in frame.hyps
                                else frame.hyps + (atom,))
                    body = tuple(Frame(b, hyps, frame.inner, frame.depth + 1)
                                 for b in renamed.body)
                    if self.check:
                        self._assert_hyps(body, after)
                    note = None
                    if self.trace is not None:
                        note = (frame.depth,
                                f"STEP {atom_snapshot(atom, after)} via {cid}")
                    alts.append((body + rest, after, used + 1, note))
                else:
                    hyp = cand[1]
                    after = solve(arg_equations(atom, hyp), solved)
                    if after is None:
                        continue
                    note = None
                    if self.trace is not None:
                        note = (frame.depth,
                                f"COHYP {atom_snapshot(atom, after)} "
                                f"~ {atom_snapshot(hyp, after)}")
                    redo = Frame(atom, (), True, frame.depth + 1)
                    alts.append(((redo,) + rest, after, used + 1, note))

            if used >= self.budget:
                if alts:
                    self.pruned = True
                continue
            stack.extend(reversed(alts))

    def _assert_hyps(self, frames: tuple[Frame, ...], solved: SolvedForm) -> None:
        known = solved.eq_vars()
        for f in frames:
            for h in f.hyps:
                missing = vars_of(h) - known
                assert not missing, (
                    f"hypothesis variables escaped the equation set: {missing}")


def _answer_key(solved: SolvedForm, qvars: tuple[Var, ...],
                cache: Optional[dict] = None) -> tuple:
    """Equality-up-to-renaming key for one answer: the query variables'
    rational values with free leaves renamed by first appearance."""
    rts = [rational_value(solved, v) for v in qvars]
    names: dict[str, str] = {}
    for r in rts:
        stack = [r.root]
        seen = set()
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            kind, payload, kids = r.nodes[i]
            if kind == "v" and payload not in names:
                names[payload] = f"?{len(names)}"
            stack.extend(reversed(kids))
    out = []
    for r in rts:
        nodes = tuple((k, names[p], kids) if k == "v" else (k, p, kids)
                      for k, p, kids in r.nodes)
        raw = (r.root, nodes)
        key = cache.get(raw) if cache is not None else None
        if key is None:
            key = canonical_key(RationalTerm(r.root, nodes))
            if cache is not None:
                cache[raw] = key
        out.append(key)
    return tuple(out)


def _budget_levels(cfg: Config) -> list[int]:
    if cfg.strategy == "dfs":
        return [cfg.budget]
    levels = []
    b = 1
    while b < cfg.budget:
        levels.append(b)
        b *= 2
    levels.append(cfg.budget)
    return levels


def run_query(prog: Program, query: Query, cfg: Config,
              trace: Optional[IO[str]] = None) -> Outcome:
    """Enumerate answers to the query, lazily.

    Each answer is a solved form extending the query's equations; restrict
    to query.variables for display.  Iterative deepening restarts the sweep
    with doubling budgets and deduplicates answers up to renaming; it stops
    early once a sweep finishes without hitting the budget wall, which also
    decides exhaustion: complete or finitely-failed if some sweep ran to the
    end, budget-exhausted otherwise.
    """
    applied = apply_mode(prog, cfg.mode)
    frames = tuple(Frame(a, (), False, 0) for a in query.atoms)
    diagnostics: list[str] = []
    cell: dict = {}

    def generate() -> Iterator[SolvedForm]:
        seen: set = set()
        key_cache: dict = {}
        emitted = 0
        for level in _budget_levels(cfg):
            run = _Run(applied, level, cfg.prefer, diagnostics, trace,
                       cfg.check_invariants)
            for solved, _ in run.solve_frames(frames, EMPTY_SOLVED, 0):
                key = _answer_key(solved, query.variables, key_cache)
                if key in seen:
                    continue
                seen.add(key)
                yield solved
                emitted += 1
                if cfg.max_answers is not None and emitted >= cfg.max_answers:
                    return
            if not run.pruned:
                cell["exhaustion"] = COMPLETE if emitted else FINITELY_FAILED
                return
        cell["exhaustion"] = BUDGET_EXHAUSTED

    return Outcome(generate(), diagnostics, cell)
