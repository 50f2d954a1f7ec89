import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polyaproc.fixtures import get_fixture  # noqa: E402
from polyaproc.operator import ReducedTable  # noqa: E402
from polyaproc.spectral import analyze  # noqa: E402

ACCEPTANCE_LINES: list = []


def build(name: str, **params):
    """(spec, spectral data, reduced table) for a named fixture with its default pins."""
    fx = get_fixture(name, **params)
    sd = analyze(fx.spec, pin_forms=fx.pins or None)
    return fx.spec, sd, ReducedTable(fx.spec, sd)


@pytest.fixture
def acceptance_record():
    def record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append((criterion, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
