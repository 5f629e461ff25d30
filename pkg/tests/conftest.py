import pytest

from . import acceptance_log


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_log.LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def record():
    """Record one acceptance line; returns the pass flag for asserting."""

    def _record(name, passed, detail):
        line = f"{name}: {'PASS' if passed else 'FAIL'} | {detail}"
        acceptance_log.LINES.append(line)
        print(line)
        return passed

    return _record
