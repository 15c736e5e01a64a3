"""Acceptance criteria 1-12, one test and one printed verdict line each.

Run with ``pytest -s tests/test_acceptance.py`` to see the lines; they are
also echoed in the terminal summary.  Criterion 12's grid_wired(521) timing
only runs with SANDLAB_LARGE=1.
"""

import pytest

from sandlab.checks import ALL_CHECKS

LINES: list[str] = []


@pytest.mark.parametrize("number", sorted(ALL_CHECKS), ids=lambda k: f"criterion-{k:02d}")
def test_criterion(number):
    res = ALL_CHECKS[number]()
    line = res.line()
    LINES.append(line)
    print(line)
    assert res.passed, line
