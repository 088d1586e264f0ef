from __future__ import annotations

import math

import pytest

from omegastop.model import make_model

# Lines recorded by the acceptance suite, printed once at the end of the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, passed: bool, detail: str) -> bool:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[criterion] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def fixture_model():
    """alpha = 1, rho = 1/2, k = 1/pi: p = 1/2 and delta = 1/4."""
    return make_model(1.0, 0.5, 1.0 / math.pi)
