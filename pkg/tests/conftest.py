import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS = {}
_STARTED = set()


@pytest.fixture
def acceptance(request):
    """Recorder for one acceptance criterion: ``record(number, passed, detail)``."""
    number = request.node.get_closest_marker("criterion").args[0]
    _STARTED.add(number)

    def record(passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _RESULTS[number] = line
        print(line)
        return passed

    return record


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _STARTED:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_STARTED):
        line = _RESULTS.get(number, f"criterion {number:>2}: FAIL  (raised before a result was recorded)")
        terminalreporter.write_line(line)
