from __future__ import annotations

import pytest

from spoisson.suites import ham, lie, sym

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def heis():
    """s(heisenberg(1)) over F_p, cached per p."""
    return lambda p: sym("heisenberg", (("m", 1),), p)


@pytest.fixture(scope="session")
def h2():
    return lambda p: ham(1, p)


@pytest.fixture(scope="session")
def named():
    return lambda family, p, **params: lie(family, tuple(sorted(params.items())), p)


@pytest.fixture(scope="session")
def sring():
    return lambda family, p, **params: sym(family, tuple(sorted(params.items())), p)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
