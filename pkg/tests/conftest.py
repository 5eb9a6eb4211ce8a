import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test still asserts on its own."""
    number = request.node.get_closest_marker("criterion").args[0]

    def record(ok: bool, detail: str) -> bool:
        _ACCEPTANCE[number] = (ok, detail)
        return ok

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker and call.when == "call" and call.excinfo is not None:
        number = marker.args[0]
        ok, detail = _ACCEPTANCE.get(number, (False, "did not complete"))
        _ACCEPTANCE[number] = (False, detail if not ok else f"{detail} (assertion failed)")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
