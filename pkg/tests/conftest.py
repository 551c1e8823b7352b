"""Shared fixtures and the acceptance summary hook.

Acceptance tests register one line per criterion through the
``acceptance_record`` fixture; the terminal summary prints them together
so a full run ends with a compact pass/fail table.
"""

import numpy as np
import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_record():
    def record(criterion: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE_LINES.append((criterion, f"[{status}] criterion {criterion}: {detail}"))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
