"""Acceptance criteria 1-10 at their stated scales.

Each case prints one PASS/FAIL line; the lines are repeated in an
"acceptance criteria" section at the end of the pytest report.  Run ``vacuumfront verify`` for the same
table outside pytest.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from vacuumfront.acceptance import CRITERIA, evaluate


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    result = evaluate(number)
    print(result.line())
    ACCEPTANCE_LINES.append((number, result.line()))
    assert result.passed, result.line()
