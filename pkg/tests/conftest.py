import pytest

# one "PASS/FAIL criterion ..." line per acceptance criterion, echoed after the run
REPORT = []


@pytest.fixture
def report():
    return REPORT


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
