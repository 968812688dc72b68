import pytest

from gasketforge.families import MapFamily

USHIKI_LAMBDA = -16 / 27

# (number, verdict, detail) rows filled in by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, str, str]] = []


@pytest.fixture(scope="session")
def ushiki():
    return MapFamily.mcmullen(2, 1, USHIKI_LAMBDA)


@pytest.fixture(scope="session")
def mcmullen33():
    return MapFamily.mcmullen(3, 3, 1 / 8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
