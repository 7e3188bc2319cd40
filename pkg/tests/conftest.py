import pytest

from shockcost import FluxModel

_ACCEPTANCE_LINES = []


def record_acceptance(line):
    # stored so the verdicts survive output capture
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def burgers():
    return FluxModel.burgers()


@pytest.fixture(scope="session")
def cubic():
    return FluxModel.cubic()
