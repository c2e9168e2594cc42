"""Logic programming with coclauses over rational terms.

Programs pair ordinary clauses with coclauses that say which infinite
derivations count as proofs.  The engine answers queries by depth-first
or iterative-deepening resolution where a goal may also close against a
coinductive hypothesis, provided the goal then passes an ordinary check
in the program extended with its coclauses.  A finite-universe oracle
computes the inductive, coinductive, and regular models for comparison.
"""

from .engine import Config, Outcome, run_query
from .parser import (SyntaxErrors, parse_program, parse_query,
                     parse_term_text, print_answer, program_to_str,
                     term_to_str)
from .semantics import Universe, compute_semantics
from .terms import Atom, Clause, Compound, Num, Program, Var

__all__ = [
    "Atom", "Clause", "Compound", "Config", "Num", "Outcome", "Program",
    "SyntaxErrors", "Universe", "Var", "compute_semantics", "parse_program",
    "parse_query", "parse_term_text", "print_answer", "program_to_str",
    "run_query", "term_to_str",
]
