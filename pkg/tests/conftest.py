import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecobrake.direct import solve_direct  # noqa: E402
from ecobrake.indirect import solve_indirect  # noqa: E402
from ecobrake.model import case_study_scenario  # noqa: E402


@pytest.fixture(scope="session")
def scn():
    return case_study_scenario()


@pytest.fixture(scope="session")
def coeffs(scn):
    return scn.coefficients


@pytest.fixture(scope="session")
def ind(scn):
    return solve_indirect(scn)


@pytest.fixture(scope="session")
def drc(scn):
    return solve_direct(scn)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def verdict():
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        assert ok, ACCEPTANCE_LINES[number]

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
