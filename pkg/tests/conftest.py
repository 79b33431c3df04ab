"""Shared pytest wiring: acceptance line collection.

The acceptance tests record one PASS/FAIL line per criterion through
the ``acceptance_record`` fixture.  Because pytest captures stdout,
those lines are replayed in a terminal section after the run so a
plain ``pytest -v`` log always carries the verdicts verbatim.
"""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_record():
    def record(criterion: int, ok: bool, detail: str = "") -> None:
        line = f"ACCEPTANCE criterion {criterion}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.line(line)
