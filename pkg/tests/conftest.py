import pytest

from mlpicard.randomness import root_key

# (criterion, verdict, detail) lines collected by test_acceptance.py
ACCEPTANCE_LINES = []


@pytest.fixture
def root():
    return root_key(0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {detail}")
