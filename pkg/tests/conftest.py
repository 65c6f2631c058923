"""Shared fixtures and the end-of-run acceptance report.

Acceptance tests record one PASS/FAIL line per criterion; the terminal
summary hook prints them after the test session so the verdicts are visible
regardless of output capturing.
"""

from __future__ import annotations

import numpy as np
import pytest

from tailrisk.distributions import StandardizedStudentT, StandardNormal

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)


@pytest.fixture(params=["normal", "t3", "t4", "t7", "t12"])
def any_dist(request):
    if request.param == "normal":
        return StandardNormal()
    return StandardizedStudentT(float(request.param[1:]))
