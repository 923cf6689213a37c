import pytest

from relmass.model import CP1

_ACCEPTANCE_LINES = []


@pytest.fixture
def cp1():
    return CP1


@pytest.fixture
def record():
    """Print and keep one PASS/FAIL line per acceptance criterion, then assert."""

    def _record(number, title, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        assert ok, line

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
