from __future__ import annotations

import pytest

from sct.chartab import FIXTURES, fixture

SMALL = [n for n in FIXTURES if n not in ("s7", "sp6_2")]


@pytest.fixture(scope="session")
def tables():
    return {name: fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def sp6_2(tables):
    return tables["sp6_2"]


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
