"""Equation sets over finite terms and their rational-tree solutions.

An equation set is a finite set of pairs of finite terms.  Solvability is
decided without an occurs check: the only failures are functor/arity clashes
and unequal integers, so X = f(X) is solvable and its solution is the
infinite term f(f(f(...))).  A solved form is a binding map whose right-hand
sides may refer back to bound variables; cycles in the map are exactly how
infinite solutions stay finitely representable.

RationalTerm is the value side: a finite rooted term graph (regular tree).
Equality of values is bisimulation, not structural equality of the graphs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .terms import Atom, Compound, Num, Term, Var, vars_of

EqPair = tuple[Term, Term]
EqSet = frozenset  # of EqPair


class SolvedForm:
    """Result of solving an equation set.

    Internally a union-find forest over variables plus a binding from class
    representatives to non-variable terms.  walk() dereferences one level:
    variable to representative to its binding, stopping at an unbound
    representative, an integer, or a compound.  Instances are immutable;
    solve() copies the maps when extending a base.
    """

    __slots__ = ("_parent", "_binding")

    def __init__(self, parent: dict[Var, Var], binding: dict[Var, Term]):
        self._parent = parent
        self._binding = binding

    def find(self, v: Var) -> Var:
        while v in self._parent:
            v = self._parent[v]
        return v

    def walk(self, t: Term) -> Term:
        while isinstance(t, Var):
            r = self.find(t)
            b = self._binding.get(r)
            if b is None:
                return r
            t = b  # bindings are never variables, so this exits the loop
        return t

    def binding_map(self) -> dict[Var, Term]:
        """The map view: united variables point at their representative,
        bound representatives at their binding.  Keys are pairwise distinct
        and no chain is circular through variables alone."""
        out: dict[Var, Term] = {}
        for v in self._parent:
            r = self.find(v)
            out[v] = self._binding.get(r, r)
        out.update(self._binding)
        out = {v: t for v, t in out.items() if t != v}
        return out

    def eq_vars(self) -> set[Var]:
        """Every variable the equations mention."""
        out: set[Var] = set(self._parent)
        out.update(self._parent.values())
        for r, t in self._binding.items():
            out.add(r)
            out.update(vars_of(t))
        return out

    def __repr__(self) -> str:
        items = ", ".join(f"{v.display()}={t!r}" for v, t in self.binding_map().items())
        return f"SolvedForm({items})"


EMPTY_SOLVED = SolvedForm({}, {})


def solve(eqs: Iterable[EqPair], base: Optional[SolvedForm] = None) -> Optional[SolvedForm]:
    """Solve an equation set, optionally on top of an existing solved form.

    Returns None when unsolvable.  Decomposition memoizes compound pairs so
    that cyclic bindings terminate: a pair being decomposed is assumed equal
    while its arguments are compared.
    """
    # copy the base maps only once a write happens; clashes stay cheap
    parent = base._parent if base is not None else {}
    binding = base._binding if base is not None else {}
    owned = base is None

    def own() -> None:
        nonlocal parent, binding, owned
        if not owned:
            parent = dict(parent)
            binding = dict(binding)
            owned = True

    def find(v: Var) -> Var:
        while v in parent:
            v = parent[v]
        return v

    def walk(t: Term) -> Term:
        while isinstance(t, Var):
            r = find(t)
            b = binding.get(r)
            if b is None:
                return r
            t = b
        return t

    work: list[EqPair] = list(eqs)
    seen: set[EqPair] = set()
    while work:
        s, t = work.pop()
        s = walk(s)
        t = walk(t)
        if s == t:
            continue
        if isinstance(s, Var) and isinstance(t, Var):
            # orient toward the lower (name, index) so representatives are
            # independent of processing order
            lo, hi = sorted((s, t), key=lambda v: (v.name, v.index))
            own()
            parent[hi] = lo
            continue
        if isinstance(s, Var):
            own()
            binding[s] = t
            continue
        if isinstance(t, Var):
            own()
            binding[t] = s
            continue
        if isinstance(s, Num) or isinstance(t, Num):
            return None  # unequal numbers, or number vs compound
        if s.functor != t.functor or len(s.args) != len(t.args):
            return None
        if (s, t) in seen:
            continue
        seen.add((s, t))
        seen.add((t, s))
        work.extend(zip(s.args, t.args))
    return SolvedForm(parent, binding)


def arg_equations(a: Atom, b: Atom) -> Optional[EqSet]:
    """Pairwise argument equations of two atoms, or None on a
    predicate/arity mismatch."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    return frozenset(zip(a.args, b.args))


def unifiable(eqs: Iterable[EqPair], a: Atom, b: Atom) -> bool:
    ae = arg_equations(a, b)
    if ae is None:
        return False
    return solve(frozenset(eqs) | ae) is not None


# ---------------------------------------------------------------------------
# Rational terms: finite rooted term graphs, equal up to bisimulation.
# ---------------------------------------------------------------------------

# Node encodings: ("f", functor, child-index tuple)
#                 ("n", int value, ())
#                 ("v", variable display name, ())


@dataclass(frozen=True, slots=True)
class RationalTerm:
    """A finite rooted graph denoting a regular (possibly infinite) tree.

    Structural == compares representations; use bisimilar() for value
    equality.  All nodes are reachable from the root.
    """

    root: int
    nodes: tuple[tuple, ...]


def rational_value(solved: SolvedForm, t: Term) -> RationalTerm:
    """Unfold a term through a solved form into a term graph, sharing a node
    whenever the same dereferenced term is reached again.  Cyclic bindings
    become cycles in the graph."""
    nodes: list = []
    memo: dict[Term, int] = {}

    def build(t: Term) -> int:
        t = solved.walk(t)
        got = memo.get(t)
        if got is not None:
            return got
        idx = len(nodes)
        memo[t] = idx
        if isinstance(t, Var):
            nodes.append(("v", t.display(), ()))
        elif isinstance(t, Num):
            nodes.append(("n", t.value, ()))
        else:
            nodes.append(None)  # reserve the slot before recursing
            nodes[idx] = ("f", t.functor, tuple(build(a) for a in t.args))
        return idx

    root = build(t)
    return RationalTerm(root, tuple(nodes))


def bisimilar(r1: RationalTerm, r2: RationalTerm) -> bool:
    """Value equality: do the two graphs unfold to the same tree?

    Coinductive pair traversal; a pair under comparison is assumed equal
    while its children are compared.  Sound and complete here because term
    graphs are deterministic (one ordered child list per node).
    """
    seen: set[tuple[int, int]] = set()
    stack = [(r1.root, r2.root)]
    while stack:
        i, j = stack.pop()
        if (i, j) in seen:
            continue
        seen.add((i, j))
        k1, p1, c1 = r1.nodes[i]
        k2, p2, c2 = r2.nodes[j]
        if k1 != k2 or p1 != p2 or len(c1) != len(c2):
            return False
        stack.extend(zip(c1, c2))
    return True


def canonical_key(r: RationalTerm) -> tuple:
    """A hashable key equal on exactly the bisimilar graphs.

    Partition refinement merges bisimilar nodes, then a preorder walk of the
    quotient from the root block yields a canonical encoding.
    """
    n = len(r.nodes)
    labels = [(k, p, len(c)) for k, p, c in r.nodes]
    # initial partition by node label; repr-sort keeps mixed payloads orderable
    order = {lab: i for i, lab in enumerate(sorted(set(labels), key=repr))}
    block = [order[lab] for lab in labels]
    while True:
        sigs = [(block[i], tuple(block[c] for c in r.nodes[i][2])) for i in range(n)]
        renum = {s: i for i, s in enumerate(sorted(set(sigs)))}
        nxt = [renum[s] for s in sigs]
        if nxt == block:
            break
        block = nxt
    # representative node per block, smallest index for determinism
    rep: dict[int, int] = {}
    for i in range(n):
        rep.setdefault(block[i], i)
    # preorder over the quotient graph
    seq: dict[int, int] = {}
    out: list[tuple] = []
    stack = [block[r.root]]
    while stack:
        b = stack.pop()
        if b in seq:
            continue
        seq[b] = len(out)
        out.append(b)
        i = rep[b]
        stack.extend(reversed([block[c] for c in r.nodes[i][2]]))
    encoded = []
    for b in out:
        k, p, c = r.nodes[rep[b]]
        encoded.append((k, p, tuple(_canon_child(seq, block, r, rep[b]))))
    return tuple(encoded)


def _canon_child(seq, block, r, i):
    return [seq[block[c]] for c in r.nodes[i][2]]


CUT = Compound("...", ())


def truncate(r: RationalTerm, depth: int) -> Term:
    """Unfold to a finite tree, replacing every node at the given depth with
    a cut marker."""
    def go(i: int, remaining: int) -> Term:
        if remaining <= 0:
            return CUT
        k, p, c = r.nodes[i]
        if k == "v":
            return Var(p, 0)
        if k == "n":
            return Num(p)
        return Compound(p, tuple(go(ch, remaining - 1) for ch in c))

    return go(r.root, depth)


def is_ground_under(solved: SolvedForm, t: Term) -> bool:
    """No unbound variable reachable from t through the solved form."""
    seen: set[Term] = set()
    stack: list[Term] = [t]
    while stack:
        x = solved.walk(stack.pop())
        if isinstance(x, Var):
            return False
        if isinstance(x, Num):
            continue
        if x in seen:
            continue
        seen.add(x)
        stack.extend(x.args)
    return True


def rt_is_ground(r: RationalTerm) -> bool:
    return all(k != "v" for k, _, _ in r.nodes)


def free_leaf_names(rts: Iterable[RationalTerm]) -> list[str]:
    """Variable leaf names across graphs, first-appearance order."""
    out: dict[str, None] = {}
    for r in rts:
        for k, p, _ in r.nodes:
            if k == "v":
                out.setdefault(p)
    return list(out)


def _splice(nodes: list, r: RationalTerm) -> int:
    """Append a copy of r's nodes, returning the new root index."""
    offset = len(nodes)
    for k, p, c in r.nodes:
        nodes.append((k, p, tuple(offset + ch for ch in c)))
    return offset + r.root


def compose(t: Term, env: dict[Var, RationalTerm]) -> RationalTerm:
    """Build the graph of a finite term whose variables take rational-term
    values.  Each assigned variable's graph is spliced in once and shared."""
    nodes: list = []
    var_root: dict[Var, int] = {}

    def build(t: Term) -> int:
        if isinstance(t, Var):
            if t in env:
                if t not in var_root:
                    var_root[t] = _splice(nodes, env[t])
                return var_root[t]
            nodes.append(("v", t.display(), ()))
            return len(nodes) - 1
        if isinstance(t, Num):
            nodes.append(("n", t.value, ()))
            return len(nodes) - 1
        idx = len(nodes)
        nodes.append(None)
        nodes[idx] = ("f", t.functor, tuple(build(a) for a in t.args))
        return idx

    root = build(t)
    return RationalTerm(root, tuple(nodes))


def substitute_leaves(r: RationalTerm, mapping: dict[str, RationalTerm]) -> RationalTerm:
    """Replace variable leaves (by display name) with rational-term values."""
    nodes: list = []
    memo: dict[int, int] = {}
    spliced: dict[str, int] = {}

    def go(i: int) -> int:
        got = memo.get(i)
        if got is not None:
            return got
        k, p, c = r.nodes[i]
        if k == "v" and p in mapping:
            if p not in spliced:
                spliced[p] = _splice(nodes, mapping[p])
            memo[i] = spliced[p]
            return spliced[p]
        idx = len(nodes)
        memo[i] = idx
        nodes.append(None)
        nodes[idx] = (k, p, tuple(go(ch) for ch in c))
        return idx

    root = go(r.root)
    return RationalTerm(root, tuple(nodes))
