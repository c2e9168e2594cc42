"""Syntactic terms, atoms, clauses and substitutions.

Everything in this module is a finite tree.  Possibly-infinite (rational)
values never appear here; they arise only as solutions of equation sets,
over in `equations`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True, slots=True)
class Var:
    """A logic variable.  index 0 means "as written in the source";
    a positive index is a renaming stamp from fresh_rename."""

    name: str
    index: int = 0

    def display(self) -> str:
        return self.name if self.index == 0 else f"{self.name}#{self.index}"


@dataclass(frozen=True, slots=True)
class Num:
    """Integer leaf.  Deliberately not a 0-ary functor: numbers only ever
    clash with unequal numbers, never with compounds."""

    value: int


@dataclass(frozen=True, slots=True)
class Compound:
    """Functor applied to argument terms; constants are 0-ary compounds."""

    functor: str
    args: tuple["Term", ...] = ()


Term = Union[Var, Num, Compound]

# List sugar is syntactic only: '.'/2 cons cells ending in the constant [].
NIL = Compound("[]", ())
CONS = "."


def cons(head: Term, tail: Term) -> Compound:
    return Compound(CONS, (head, tail))


def make_list(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class Clause:
    head: Atom
    body: tuple[Atom, ...] = ()


@dataclass(frozen=True, slots=True)
class Program:
    """A pair of clause lists: ordinary clauses and coclauses.  Cofacts are
    coclauses with an empty body."""

    clauses: tuple[Clause, ...] = ()
    coclauses: tuple[Clause, ...] = ()


# Reserved predicates, keyed by (name, arity).  These are evaluated by the
# engine, may not be redefined, and never enter hypothesis sets.
BUILTIN_ARITIES = {
    ("=", 2),
    ("\\=", 2),
    ("<", 2),
    (">", 2),
    ("=<", 2),
    (">=", 2),
    ("is", 2),
    ("true", 0),
}

BUILTIN_NAMES = {name for name, _ in BUILTIN_ARITIES}


def is_builtin(atom: Atom) -> bool:
    return (atom.pred, len(atom.args)) in BUILTIN_ARITIES


def _iter_vars(x) -> Iterator[Var]:
    if isinstance(x, Var):
        yield x
    elif isinstance(x, Num):
        return
    elif isinstance(x, (Compound, Atom)):
        for a in x.args:
            yield from _iter_vars(a)
    elif isinstance(x, Clause):
        yield from _iter_vars(x.head)
        for b in x.body:
            yield from _iter_vars(b)
    elif isinstance(x, (tuple, list, set, frozenset)):
        for item in x:
            yield from _iter_vars(item)
    else:
        raise TypeError(f"cannot collect variables from {x!r}")


def vars_of(x) -> set[Var]:
    """All variables occurring in a term, atom, clause, equation pair, or any
    nesting of those in tuples/lists/sets."""
    return set(_iter_vars(x))


def ordered_vars(x) -> list[Var]:
    """Like vars_of but in first-occurrence order (only meaningful for
    ordered containers)."""
    return list(dict.fromkeys(_iter_vars(x)))


Subst = dict  # Var -> Term, applied simultaneously


def apply_subst(subst: Subst, x):
    """Simultaneous substitution; bindings are not re-substituted into."""
    if isinstance(x, Var):
        return subst.get(x, x)
    if isinstance(x, Num):
        return x
    if isinstance(x, Compound):
        return Compound(x.functor, tuple(apply_subst(subst, a) for a in x.args))
    if isinstance(x, Atom):
        return Atom(x.pred, tuple(apply_subst(subst, a) for a in x.args))
    if isinstance(x, Clause):
        return Clause(apply_subst(subst, x.head),
                      tuple(apply_subst(subst, b) for b in x.body))
    raise TypeError(f"cannot substitute into {x!r}")


def fresh_rename(clause: Clause, counter: Iterator[int]) -> Clause:
    """Variant of a clause with every variable stamped with one fresh index.

    The caller owns the counter (itertools.count(1)); a stamp is consumed on
    every call, so no two renamings can collide.  Clause variables must have
    pairwise distinct names, which the parser guarantees.
    """
    stamp = next(counter)
    vs = ordered_vars(clause)
    if not vs:
        return clause
    return apply_subst({v: Var(v.name, stamp) for v in vs}, clause)


def subst_leq(smaller: Subst, larger: Subst) -> bool:
    """True when `larger` extends `smaller`: same bindings on all of
    smaller's domain."""
    return all(k in larger and larger[k] == v for k, v in smaller.items())
