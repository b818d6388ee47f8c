import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion id -> (passed, detail), filled by the acceptance tests
CRITERIA = {}


@pytest.fixture
def criterion():
    def record(number, title, passed, detail=""):
        CRITERIA[number] = (title, bool(passed), detail)
        status = "PASS" if passed else "FAIL"
        print(f"criterion {number:>2} [{status}] {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        title, passed, detail = CRITERIA[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} [{status}] {title}: {detail}")
