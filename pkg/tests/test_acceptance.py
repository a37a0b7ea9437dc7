"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Criterion 12 (perturbation coefficient -5/4) is expected to fail; see the
README for the analysis.
"""
import pytest

from pilotnonlocal.acceptance import CRITERIA


@pytest.mark.parametrize("check", CRITERIA, ids=[f"criterion_{k + 1:02d}" for k in range(len(CRITERIA))])
def test_criterion(check, capsys):
    res = check()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
