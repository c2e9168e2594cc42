from pathlib import Path

import pytest

from colp.engine import Config, run_query
from colp.parser import parse_program, parse_query, print_answer

PROGRAMS_DIR = Path(__file__).resolve().parent.parent / "programs"


def load_program(name: str):
    path = PROGRAMS_DIR / name
    return parse_program(path.read_text(encoding="utf-8"), origin=name)


def answers(prog, query_text: str, **kwargs):
    """Run a query and return (sorted unique answer strings, exhaustion)."""
    query = parse_query(query_text)
    outcome = run_query(prog, query, Config(**kwargs))
    rendered = sorted({print_answer(a, query.variables)
                       for a in outcome.answers})
    return rendered, outcome.exhaustion


@pytest.fixture(scope="session")
def maxelem():
    return load_program("maxelem.colp")


@pytest.fixture(scope="session")
def lists():
    return load_program("lists.colp")


@pytest.fixture(scope="session")
def omega():
    return load_program("omega.colp")
