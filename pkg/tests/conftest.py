from pathlib import Path

import pytest

from signedq.algebra import COUNTING
from signedq.frontend import parse_file
from signedq.storage import load_dir

DATA = Path(__file__).parent / "data"


def load_fixture(name: str, semiring=None):
    q = parse_file(DATA / name / "query.cqn")
    db = load_dir(DATA / name, [(lit.name, lit.args) for lit in q.body], semiring)
    return q, db


@pytest.fixture
def fig1():
    return load_fixture("fig1")


@pytest.fixture
def faq52():
    return load_fixture("faq52", COUNTING)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
