import sys
from pathlib import Path

import pytest

from iterplex.algebra import builtin_table, cyclic_group, klein_group, load_cayley_table

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def z5():
    return load_cayley_table(FIXTURES / "z5.tbl")


@pytest.fixture(scope="session")
def q5():
    return load_cayley_table(FIXTURES / "q5.tbl")


def small_groups(max_order=5):
    """Built-in groups of order 2..max_order."""
    out = [cyclic_group(n) for n in range(2, max_order + 1)]
    if max_order >= 4:
        out.insert(3, klein_group())
    return out


__all__ = ["FIXTURES", "ROOT", "small_groups", "builtin_table"]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
