import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

RUN_SLOW = os.environ.get("PILOTWAVE_SLOW") == "1"


def pytest_collection_modifyitems(config, items):
    if RUN_SLOW:
        return
    skip = pytest.mark.skip(reason="full-grid run; set PILOTWAVE_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


ACCEPTANCE_LINES = []


def report_criterion(key, passed, text):
    ACCEPTANCE_LINES.append((key, f"[{'PASS' if passed else 'FAIL'}] criterion {key}: {text}"))


@pytest.fixture
def criterion():
    return report_criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES, key=lambda kv: kv[0]):
        terminalreporter.write_line(line)
