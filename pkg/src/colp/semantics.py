"""Finite-universe ground semantics, the oracle side of the package.

Clauses are ground over an explicit finite universe of rational terms,
yielding a finite rule set whose fixed points give three interpretations:
least (inductive), greatest consistent (coinductive), and the greatest
consistent set inside the least model of clauses plus coclauses, which on a
finite base is both the flexible and the regular reading.  Instances whose
atoms fall outside the universe are dropped with a warning, so results are
exact only for universe-closed programs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .equations import (EMPTY_SOLVED, RationalTerm, SolvedForm, bisimilar,
                        canonical_key, compose, free_leaf_names,
                        rational_value, rt_is_ground, solve, substitute_leaves,
                        truncate)
from .parser import Query, SyntaxErrors, parse_term_text, term_to_str
from .terms import (Atom, Clause, Compound, Num, Program, Term, Var,
                    is_builtin, ordered_vars)

# a ground atom is (predicate, universe element indexes)
GroundAtom = tuple[str, tuple[int, ...]]


class UniverseError(Exception):
    pass


class Universe:
    """Finite set of ground rational terms, deduplicated up to bisimilarity.

    Each element keeps a display name: the declared name, or the source text
    it was written as.
    """

    def __init__(self, entries: Iterable[tuple[str, RationalTerm]]):
        self.elements: list[RationalTerm] = []
        self.names: list[str] = []
        self._index: dict[tuple, int] = {}
        for name, rt in entries:
            if not rt_is_ground(rt):
                raise UniverseError(f"universe element {name!r} is not ground")
            key = canonical_key(rt)
            if key in self._index:
                continue
            self._index[key] = len(self.elements)
            self.elements.append(rt)
            self.names.append(name)

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, rt: RationalTerm) -> Optional[int]:
        return self._index.get(canonical_key(rt))

    def display(self, i: int) -> str:
        return self.names[i]

    def atom_str(self, ga: GroundAtom) -> str:
        pred, args = ga
        if not args:
            return pred
        return f"{pred}({', '.join(self.display(i) for i in args)})"

    @classmethod
    def from_text(cls, text: str, origin: str = "<universe>") -> "Universe":
        """Parse the one-definition-per-line format.

        A line is `name := term` or a bare ground term; terms may mention
        defined names, also recursively, e.g. `omega := s(omega)`.
        """
        items: list[tuple[Optional[str], str, int]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("%", 1)[0].strip()
            if not line:
                continue
            name = None
            body = line
            if ":=" in line:
                name, body = (part.strip() for part in line.split(":=", 1))
                if not name.isidentifier() or not name[0].islower():
                    raise UniverseError(
                        f"{origin}:{lineno}: bad universe name {name!r}")
            items.append((name, body, lineno))

        defined = {name for name, _, _ in items if name is not None}

        def link(t: Term) -> Term:
            # defined names parse as constants; turn them into variables so
            # one equation system ties all definitions together
            if isinstance(t, Compound):
                if not t.args and t.functor in defined:
                    return Var(f"#{t.functor}", 0)
                return Compound(t.functor, tuple(link(a) for a in t.args))
            return t

        eqs = []
        roots: list[tuple[str, Term]] = []
        for name, body, lineno in items:
            try:
                term = link(parse_term_text(body, origin=f"{origin}:{lineno}"))
            except SyntaxErrors as e:
                raise UniverseError(str(e)) from None
            if name is not None:
                eqs.append((Var(f"#{name}", 0), term))
                roots.append((name, Var(f"#{name}", 0)))
            else:
                roots.append((body, term))
        solved = solve(eqs)
        if solved is None:
            raise UniverseError(f"{origin}: definitions have no solution")
        entries = []
        for name, term in roots:
            rt = rational_value(solved, term)
            if not rt_is_ground(rt):
                raise UniverseError(
                    f"{origin}: element {name!r} is not ground")
            entries.append((name, rt))
        return cls(entries)

    @classmethod
    def from_terms(cls, terms: Iterable[Term]) -> "Universe":
        return cls((term_to_str(t), rational_value(EMPTY_SOLVED, t))
                   for t in terms)


def terms_up_to_depth(functors: Sequence[tuple[str, int]],
                      depth: int) -> list[Term]:
    """All finite ground terms of nesting depth <= depth, a convenience for
    building universes.  Functor list entries are (name, arity); integers can
    be included as ("3", 0) style constants only via explicit terms instead."""
    layers: list[list[Term]] = [[Compound(f, ()) for f, n in functors if n == 0]]
    for _ in range(depth):
        prev = [t for layer in layers for t in layer]
        new: list[Term] = []
        for f, n in functors:
            if n == 0:
                continue
            for combo in itertools.product(prev, repeat=n):
                t = Compound(f, combo)
                if t not in prev and t not in new:
                    new.append(t)
        layers.append(new)
    return [t for layer in layers for t in layer]


def rt_to_str(rt: RationalTerm, depth: int = 8) -> str:
    """Finite rendering of a possibly-cyclic ground term for messages."""
    return term_to_str(truncate(rt, depth))


@dataclass(frozen=True)
class GroundRule:
    premises: frozenset  # of GroundAtom
    conclusion: GroundAtom


class GroundTypeError(Exception):
    pass


_ARITH2 = {"+", "-", "*", "max", "min"}


def _rt_arith(rt: RationalTerm, node: int, active: set) -> int:
    kind, payload, kids = rt.nodes[node]
    if kind == "n":
        return payload
    if kind == "v":
        raise GroundTypeError("variable in arithmetic")
    if node in active:
        raise GroundTypeError("cyclic arithmetic expression")
    active.add(node)
    try:
        if payload == "-" and len(kids) == 1:
            return -_rt_arith(rt, kids[0], active)
        if payload in _ARITH2 and len(kids) == 2:
            x = _rt_arith(rt, kids[0], active)
            y = _rt_arith(rt, kids[1], active)
            return {"+": lambda: x + y, "-": lambda: x - y,
                    "*": lambda: x * y, "max": lambda: max(x, y),
                    "min": lambda: min(x, y)}[payload]()
        raise GroundTypeError(f"not arithmetic: {payload}/{len(kids)}")
    finally:
        active.discard(node)


def eval_ground_builtin(pred: str, args: Sequence[RationalTerm]) -> bool:
    """Truth of a builtin atom on ground rational terms.

    Raises GroundTypeError outside the builtin's contract, which grounding
    treats as an instance to drop with a warning.
    """
    if pred == "true":
        return True
    a, b = args
    if pred == "=":
        return bisimilar(a, b)
    if pred == "\\=":
        return not bisimilar(a, b)
    if pred == "is":
        value = _rt_arith(b, b.root, set())
        return bisimilar(a, rational_value(EMPTY_SOLVED, Num(value)))
    x = _rt_arith(a, a.root, set())
    y = _rt_arith(b, b.root, set())
    return {"<": x < y, ">": x > y, "=<": x <= y, ">=": x >= y}[pred]


def ground_instances(clauses: Sequence[Clause],
                     u: Universe) -> tuple[frozenset, tuple[str, ...]]:
    """Every instance of every clause with variables drawn from the universe.

    Builtin body atoms are evaluated away: a failing builtin drops the
    instance silently, a type error drops it with a warning.  Any other atom
    whose arguments leave the universe drops the instance with a warning.
    """
    rules: set[GroundRule] = set()
    warnings: dict[str, None] = {}
    for clause in clauses:
        cvars = ordered_vars(clause)
        for combo in itertools.product(range(len(u)), repeat=len(cvars)):
            env = {v: u.elements[i] for v, i in zip(cvars, combo)}
            keep = True
            premises: set[GroundAtom] = set()
            conclusion: Optional[GroundAtom] = None
            for atom in (clause.head, *clause.body):
                arg_rts = [compose(t, env) for t in atom.args]
                if is_builtin(atom):
                    try:
                        holds = eval_ground_builtin(atom.pred, arg_rts)
                    except GroundTypeError as e:
                        warnings.setdefault(
                            f"dropped instance of {atom.pred}/"
                            f"{len(atom.args)}: {e}")
                        holds = False
                    if not holds:
                        keep = False
                        break
                    continue
                indexes = []
                for rt in arg_rts:
                    idx = u.index_of(rt)
                    if idx is None:
                        warnings.setdefault(
                            f"instance escapes the universe: "
                            f"{atom.pred} on {rt_to_str(rt)}")
                        keep = False
                        break
                    indexes.append(idx)
                if not keep:
                    break
                ga: GroundAtom = (atom.pred, tuple(indexes))
                if conclusion is None:
                    conclusion = ga
                else:
                    premises.add(ga)
            if keep and conclusion is not None:
                rules.add(GroundRule(frozenset(premises), conclusion))
    return frozenset(rules), tuple(warnings)


def immediate_consequences(rules: frozenset, interp: frozenset) -> frozenset:
    return frozenset(r.conclusion for r in rules if r.premises <= interp)


def least_model(rules: frozenset) -> frozenset:
    interp: frozenset = frozenset()
    while True:
        nxt = immediate_consequences(rules, interp)
        if nxt == interp:
            return interp
        interp = nxt


def greatest_consistent_within(rules: frozenset, bound: frozenset) -> frozenset:
    """Largest X inside bound with X included in its own one-step
    consequences, by downward iteration from the bound."""
    interp = bound
    while True:
        nxt = interp & immediate_consequences(rules, interp)
        if nxt == interp:
            return interp
        interp = nxt


def herbrand_base(prog: Program, u: Universe) -> frozenset:
    sigs: list[tuple[str, int]] = []
    for clause in prog.clauses + prog.coclauses:
        for atom in (clause.head, *clause.body):
            sig = (atom.pred, len(atom.args))
            if not is_builtin(atom) and sig not in sigs:
                sigs.append(sig)
    base: set[GroundAtom] = set()
    for pred, arity in sigs:
        for combo in itertools.product(range(len(u)), repeat=arity):
            base.add((pred, combo))
    return frozenset(base)


@dataclass(frozen=True)
class SemanticsResult:
    ind: frozenset
    coind: frozenset
    reg: frozenset
    ind_all: frozenset       # least model of clauses plus coclauses
    rules: frozenset         # ground instances of the clauses
    rules_all: frozenset     # ground instances of clauses plus coclauses
    base: frozenset
    warnings: tuple[str, ...]


def compute_semantics(prog: Program, u: Universe) -> SemanticsResult:
    rules, warn1 = ground_instances(prog.clauses, u)
    rules_all, warn2 = ground_instances(prog.clauses + prog.coclauses, u)
    ind = least_model(rules)
    base = herbrand_base(prog, u)
    coind = greatest_consistent_within(rules, base)
    ind_all = least_model(rules_all)
    reg = greatest_consistent_within(rules, ind_all)
    warnings = dict.fromkeys(warn1)
    warnings.update(dict.fromkeys(warn2))
    return SemanticsResult(ind, coind, reg, ind_all, rules, rules_all, base,
                           tuple(warnings))


class LoopProver:
    """Derivability of hypothetical judgments: an atom holds under a set of
    already-visited atoms if it is a visited atom in the inductive model of
    clauses plus coclauses, or some ground clause concludes it with all
    premises derivable after adding it to the visited set.

    Judgments with the atom inside the hypothesis set form one stratum per
    hypothesis set and are solved together as a least fixed point; all other
    recursion strictly grows the hypothesis set, so the search terminates.
    """

    def __init__(self, rules: frozenset, ind_all: frozenset):
        self.ind_all = ind_all
        self.by_conclusion: dict[GroundAtom, list[frozenset]] = {}
        for r in rules:
            self.by_conclusion.setdefault(r.conclusion, []).append(r.premises)
        self._clusters: dict[frozenset, frozenset] = {}
        self._jumps: dict[tuple[frozenset, GroundAtom], bool] = {}

    def derivable(self, hyps: frozenset, atom: GroundAtom) -> bool:
        if atom in hyps:
            return atom in self._cluster(hyps)
        key = (hyps, atom)
        got = self._jumps.get(key)
        if got is None:
            grown = hyps | {atom}
            got = any(all(self.derivable(grown, b) for b in premises)
                      for premises in self.by_conclusion.get(atom, ()))
            self._jumps[key] = got
        return got

    def _cluster(self, hyps: frozenset) -> frozenset:
        got = self._clusters.get(hyps)
        if got is not None:
            return got
        derived = {a for a in hyps if a in self.ind_all}
        changed = True
        while changed:
            changed = False
            for atom in hyps:
                if atom in derived:
                    continue
                for premises in self.by_conclusion.get(atom, ()):
                    if all(b in derived if b in hyps
                           else self.derivable(hyps | {b}, b)
                           for b in premises):
                        derived.add(atom)
                        changed = True
                        break
        result = frozenset(derived)
        self._clusters[hyps] = result
        return result


def loop_matches_regular(sem: SemanticsResult) -> bool:
    """The hypothetical-judgment reading agrees with the fixed-point one."""
    prover = LoopProver(sem.rules, sem.ind_all)
    empty: frozenset = frozenset()
    return all(prover.derivable(empty, a) == (a in sem.reg)
               for a in sem.base)


def regular_by_enumeration(rules: frozenset, bound: frozenset) -> frozenset:
    """Union of all consistent subsets of the bound, by brute force."""
    atoms = sorted(bound)
    n = len(atoms)
    if n > 16:
        raise ValueError("enumeration bound exceeded (16 atoms)")
    position = {a: i for i, a in enumerate(atoms)}
    premise_masks: dict[int, list[int]] = {}
    for r in rules:
        if r.conclusion not in position:
            continue
        if not all(b in position for b in r.premises):
            continue
        mask = 0
        for b in r.premises:
            mask |= 1 << position[b]
        premise_masks.setdefault(1 << position[r.conclusion], []).append(mask)
    union = 0
    for subset in range(1 << n):
        ok = True
        probe = subset
        while probe:
            bit = probe & -probe
            probe -= bit
            if not any((pmask & subset) == pmask
                       for pmask in premise_masks.get(bit, ())):
                ok = False
                break
        if ok:
            union |= subset
    return frozenset(a for a, i in position.items() if union & (1 << i))


def regular_answers(query: Query, u: Universe,
                    reg: frozenset) -> frozenset:
    """Ground answers to a query: assignments of its variables to universe
    elements (anonymous variables enumerated but projected away) under which
    builtins hold and every other atom lies in the given interpretation."""
    all_vars: list[Var] = []
    for atom in query.atoms:
        for v in ordered_vars(atom):
            if v not in all_vars:
                all_vars.append(v)
    answers: set[tuple[int, ...]] = set()
    named = list(query.variables)
    for combo in itertools.product(range(len(u)), repeat=len(all_vars)):
        env = {v: u.elements[i] for v, i in zip(all_vars, combo)}
        indexes = dict(zip(all_vars, combo))
        ok = True
        for atom in query.atoms:
            arg_rts = [compose(t, env) for t in atom.args]
            if is_builtin(atom):
                try:
                    if not eval_ground_builtin(atom.pred, arg_rts):
                        ok = False
                except GroundTypeError:
                    ok = False
            else:
                idxs = [u.index_of(rt) for rt in arg_rts]
                if None in idxs or (atom.pred, tuple(idxs)) not in reg:
                    ok = False
            if not ok:
                break
        if ok:
            answers.add(tuple(indexes[v] for v in named))
    return frozenset(answers)


def universe_instantiations(solved: SolvedForm, qvars: Sequence[Var],
                            u: Universe) -> frozenset:
    """All ways an engine answer lands inside the universe: assign universe
    elements to the free variable leaves of the answer values and keep the
    assignments whose results are all universe elements."""
    rts = [rational_value(solved, v) for v in qvars]
    free = free_leaf_names(rts)
    out: set[tuple[int, ...]] = set()
    for combo in itertools.product(range(len(u)), repeat=len(free)):
        mapping = {name: u.elements[i] for name, i in zip(free, combo)}
        idxs = []
        for rt in rts:
            grounded = substitute_leaves(rt, mapping) if free else rt
            idx = u.index_of(grounded)
            if idx is None:
                break
            idxs.append(idx)
        else:
            out.add(tuple(idxs))
    return frozenset(out)
