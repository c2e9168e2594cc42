"""Concrete syntax: lexer, parser and printers.

    head :- b1, ..., bn.     clause          head.      fact
    head :~ b1, ..., bn.     coclause        head :~.   cofact
    ?- a1, ..., an.          query

Variables start with an uppercase letter or underscore; a bare `_` is
anonymous and fresh at each occurrence.  Lists are sugar over '.'/2 and [].
`%` comments to end of line.  The infix builtins  =  \\=  <  >  =<  >=  is
are goal-level only; + - * build terms anywhere and are evaluated by is.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .terms import (Atom, BUILTIN_ARITIES, BUILTIN_NAMES, Clause, Compound,
                    NIL, Num, Program, Term, Var, cons)
from .equations import SolvedForm

_SYMBOLS = [":-", ":~", "?-", "\\=", "=<", ">=",
            "=", "<", ">", "(", ")", "[", "]", "|", ",", ".", "+", "-", "*"]

_INFIX_GOALS = {"=", "\\=", "<", ">", "=<", ">=", "is"}


@dataclass(frozen=True)
class ParseIssue:
    message: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class SyntaxErrors(Exception):
    """All issues found in one source, collected with clause-level recovery."""

    def __init__(self, origin: str, issues: Sequence[ParseIssue]):
        self.origin = origin
        self.issues = list(issues)
        super().__init__("; ".join(f"{origin}:{i}" for i in self.issues))


class _Bail(Exception):
    """Internal: abort the current clause, recover at the next '.'."""

    def __init__(self, issue: ParseIssue):
        self.issue = issue


@dataclass(frozen=True)
class Tok:
    kind: str  # "int" | "atom" | "var" | "sym" | "eof"
    text: str
    line: int
    col: int


def _lex(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (ch == "_" or ch.isupper()) else "atom"
            toks.append(Tok(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Tok("sym", sym, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise SyntaxErrors("<input>", [ParseIssue(f"unexpected character {ch!r}", line, col)])
    toks.append(Tok("eof", "", line, col))
    return toks


@dataclass(frozen=True)
class Query:
    atoms: tuple[Atom, ...]
    variables: tuple[Var, ...]  # named query variables, first occurrence order


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0
        self.anon = 0

    def peek(self) -> Tok:
        return self.toks[self.pos]

    def next(self) -> Tok:
        t = self.toks[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_sym(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == text

    def expect_sym(self, text: str) -> Tok:
        t = self.peek()
        if not self.at_sym(text):
            raise _Bail(ParseIssue(f"expected {text!r}, found {t.text or 'end of input'!r}",
                                   t.line, t.col))
        return self.next()

    def fail(self, msg: str) -> None:
        t = self.peek()
        raise _Bail(ParseIssue(msg, t.line, t.col))

    # -- terms ------------------------------------------------------------

    def term(self) -> Term:
        left = self.mul_term()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.next().text
            right = self.mul_term()
            left = Compound(op, (left, right))
        return left

    def mul_term(self) -> Term:
        left = self.primary()
        while self.at_sym("*"):
            self.next()
            right = self.primary()
            left = Compound("*", (left, right))
        return left

    def primary(self) -> Term:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Num(int(t.text))
        if t.kind == "sym" and t.text == "-":
            self.next()
            inner = self.primary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Compound("-", (inner,))
        if t.kind == "var":
            self.next()
            if t.text == "_":
                self.anon += 1
                return Var(f"_#{self.anon}", 0)
            return Var(t.text, 0)
        if t.kind == "atom":
            self.next()
            if self.at_sym("("):
                return Compound(t.text, self.arg_list())
            return Compound(t.text, ())
        if t.kind == "sym" and t.text == "[":
            return self.list_term()
        if t.kind == "sym" and t.text == "(":
            self.next()
            inner = self.term()
            self.expect_sym(")")
            return inner
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")

    def arg_list(self) -> tuple[Term, ...]:
        self.expect_sym("(")
        args = [self.term()]
        while self.at_sym(","):
            self.next()
            args.append(self.term())
        self.expect_sym(")")
        return tuple(args)

    def list_term(self) -> Term:
        self.expect_sym("[")
        if self.at_sym("]"):
            self.next()
            return NIL
        items = [self.term()]
        while self.at_sym(","):
            self.next()
            items.append(self.term())
        tail: Term = NIL
        if self.at_sym("|"):
            self.next()
            tail = self.term()
        self.expect_sym("]")
        out = tail
        for item in reversed(items):
            out = cons(item, out)
        return out

    # -- goals and clauses --------------------------------------------------

    def goal(self) -> Atom:
        start = self.peek()
        left = self.term()
        t = self.peek()
        if (t.kind == "sym" and t.text in _INFIX_GOALS) or (t.kind == "atom" and t.text == "is"):
            self.next()
            right = self.term()
            return Atom(t.text, (left, right))
        if isinstance(left, Compound):
            return Atom(left.functor, left.args)
        raise _Bail(ParseIssue("a goal must be an atom or an infix builtin",
                               start.line, start.col))

    def body(self) -> tuple[Atom, ...]:
        goals = [self.goal()]
        while self.at_sym(","):
            self.next()
            goals.append(self.goal())
        return tuple(goals)

    def head(self) -> Atom:
        t = self.peek()
        if t.kind != "atom":
            self.fail(f"expected a clause head, found {t.text or 'end of input'!r}")
        self.next()
        if self.at_sym("("):
            return Atom(t.text, self.arg_list())
        return Atom(t.text, ())

    def clause(self) -> tuple[Clause, bool]:
        """One clause; the flag says whether it is a coclause."""
        h = self.head()
        if self.at_sym("."):
            self.next()
            return Clause(h, ()), False
        if self.at_sym(":-"):
            self.next()
            b = self.body()
            self.expect_sym(".")
            return Clause(h, b), False
        if self.at_sym(":~"):
            self.next()
            if self.at_sym("."):
                self.next()
                return Clause(h, ()), True
            b = self.body()
            self.expect_sym(".")
            return Clause(h, b), True
        self.fail("expected '.', ':-' or ':~' after the clause head")

    def skip_past_dot(self) -> None:
        while True:
            t = self.next()
            if t.kind == "eof" or (t.kind == "sym" and t.text == "."):
                return


def _validate(clauses: list[tuple[Clause, bool, Tok]]) -> list[ParseIssue]:
    issues = []
    for cl, _, tok in clauses:
        sig = (cl.head.pred, len(cl.head.args))
        if cl.head.pred in BUILTIN_NAMES:
            issues.append(ParseIssue(
                f"cannot redefine builtin {sig[0]}/{sig[1]}", tok.line, tok.col))
        for atom in cl.body:
            if atom.pred in BUILTIN_NAMES and (atom.pred, len(atom.args)) not in BUILTIN_ARITIES:
                issues.append(ParseIssue(
                    f"builtin {atom.pred} used at arity {len(atom.args)}",
                    tok.line, tok.col))
    return issues


def parse_program(text: str, origin: str = "<string>") -> Program:
    p = _Parser(text)
    parsed: list[tuple[Clause, bool, Tok]] = []
    issues: list[ParseIssue] = []
    while p.peek().kind != "eof":
        start = p.peek()
        try:
            cl, is_co = p.clause()
            parsed.append((cl, is_co, start))
        except _Bail as b:
            issues.append(b.issue)
            p.skip_past_dot()
    issues.extend(_validate(parsed))
    if issues:
        raise SyntaxErrors(origin, issues)
    clauses = tuple(cl for cl, co, _ in parsed if not co)
    coclauses = tuple(cl for cl, co, _ in parsed if co)
    return Program(clauses, coclauses)


def parse_query(text: str, origin: str = "<query>") -> Query:
    p = _Parser(text)
    try:
        if p.at_sym("?-"):
            p.next()
        atoms = p.body()
        if p.at_sym("."):
            p.next()
        if p.peek().kind != "eof":
            p.fail("trailing input after the query")
    except _Bail as b:
        raise SyntaxErrors(origin, [b.issue]) from None
    if atoms == (Atom("true", ()),):
        atoms = ()
    variables = []
    for atom in atoms:
        for v in _query_vars(atom):
            if v not in variables:
                variables.append(v)
    return Query(tuple(atoms), tuple(variables))


def parse_term_text(text: str, origin: str = "<term>") -> Term:
    """A single term, used by universe files."""
    p = _Parser(text)
    try:
        t = p.term()
        if p.peek().kind != "eof":
            p.fail("trailing input after the term")
    except _Bail as b:
        raise SyntaxErrors(origin, [b.issue]) from None
    return t


def _query_vars(atom: Atom):
    from .terms import ordered_vars
    for v in ordered_vars(atom):
        if not v.name.startswith("_#"):
            yield v


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"+": 500, "-": 500, "*": 400}


def term_to_str(t: Term) -> str:
    return _term_str(t, 1000, False)


def _term_str(t: Term, maxprec: int, right: bool) -> str:
    if isinstance(t, Var):
        return "_" if t.name.startswith("_#") else t.display()
    if isinstance(t, Num):
        return str(t.value)
    if t == NIL:
        return "[]"
    if t.functor == "." and len(t.args) == 2:
        return _list_str(t)
    if t.functor in _PREC and len(t.args) == 2:
        prec = _PREC[t.functor]
        s = (f"{_term_str(t.args[0], prec, False)}{t.functor}"
             f"{_term_str(t.args[1], prec, True)}")
        if prec > maxprec or (prec == maxprec and right):
            return f"({s})"
        return s
    if t.functor == "-" and len(t.args) == 1:
        inner = _term_str(t.args[0], 0, False)
        return f"-{inner}"
    if not t.args:
        return t.functor
    return f"{t.functor}({', '.join(_term_str(a, 999, False) for a in t.args)})"


def _list_str(t: Compound) -> str:
    items = []
    cur: Term = t
    while isinstance(cur, Compound) and cur.functor == "." and len(cur.args) == 2:
        items.append(_term_str(cur.args[0], 999, False))
        cur = cur.args[1]
    if cur == NIL:
        return f"[{','.join(items)}]"
    return f"[{','.join(items)}|{_term_str(cur, 999, False)}]"


def atom_to_str(a: Atom) -> str:
    if a.pred in _INFIX_GOALS and len(a.args) == 2:
        return f"{term_to_str(a.args[0])} {a.pred} {term_to_str(a.args[1])}"
    if not a.args:
        return a.pred
    return f"{a.pred}({', '.join(term_to_str(x) for x in a.args)})"


def clause_to_str(c: Clause, coclause: bool = False) -> str:
    neck = ":~" if coclause else ":-"
    if not c.body:
        return f"{atom_to_str(c.head)} :~." if coclause else f"{atom_to_str(c.head)}."
    return f"{atom_to_str(c.head)} {neck} {', '.join(atom_to_str(b) for b in c.body)}."


def program_to_str(p: Program) -> str:
    lines = [clause_to_str(c) for c in p.clauses]
    lines += [clause_to_str(c, coclause=True) for c in p.coclauses]
    return "\n".join(lines)


def print_answer(solved: SolvedForm, qvars: Sequence[Var]) -> str:
    """Render an answer restricted to the query variables, one line each.

    Cyclic values print equationally by reusing the variable that closes the
    cycle, e.g.  L = [1,2|L].  With no query variables the answer is `true`.
    """
    if not qvars:
        return "true"
    lines = []
    for v in qvars:
        w = solved.walk(v)
        if isinstance(w, Var):
            rhs = "_" if w == v else w.display()
        else:
            rhs = term_to_str(_unfold(v, solved, {}))
        lines.append(f"{v.display()} = {rhs}")
    return "\n".join(lines)


def term_snapshot(t: Term, solved: SolvedForm) -> str:
    """One term under a solved form, cycles rendered as back-edge variables."""
    return term_to_str(_unfold(t, solved, {}))


def atom_snapshot(a: Atom, solved: SolvedForm) -> str:
    return atom_to_str(Atom(a.pred, tuple(_unfold(x, solved, {}) for x in a.args)))


def _unfold(t: Term, solved: SolvedForm, active: dict[Term, str]) -> Term:
    """Finite syntactic image of a possibly-cyclic value: a back edge becomes
    a variable leaf named after the variable whose binding it re-enters."""
    w = solved.walk(t)
    if isinstance(w, Var):
        return Var(w.display(), 0)
    if isinstance(w, Num):
        return w
    known = active.get(w)
    if known is not None:
        return Var(known, 0)
    entered = isinstance(t, Var)
    if entered:
        active[w] = t.display()
    out = Compound(w.functor, tuple(_unfold(a, solved, active) for a in w.args))
    if entered:
        del active[w]
    return out
