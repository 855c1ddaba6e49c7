import pytest

from .support import RUNNING

_ACCEPTANCE: list[str] = []


@pytest.fixture
def running():
    return RUNNING


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
