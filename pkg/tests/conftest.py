from pathlib import Path

import numpy as np
import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURE_CSV = REPO_ROOT / "fixtures" / "toy_draws.csv"

# One "CRITERION n: PASS/FAIL -- detail" line per acceptance criterion;
# test_acceptance.py appends here and the summary hook prints the table.
ACCEPTANCE = []


@pytest.fixture(scope="session")
def toy_draws():
    """The 10 hand-transcribed 3x2 varimax draws shipped with the repo."""
    from loadalign import sampleio

    return sampleio.read_sample(FIXTURE_CSV)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
