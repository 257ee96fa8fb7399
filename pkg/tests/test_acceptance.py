"""The ten acceptance criteria at their stated tolerances.

Each test prints one PASS/FAIL line; the terminal summary repeats them.
"""

import pytest

from smoothpen.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    res = run_criterion(k)
    print(res.line())
    failed = [c for c in res.checks if not c.passed]
    detail = "; ".join(f"{c.name}: {c.value!r} vs {c.target!r} (tol {c.tol:g})" for c in failed)
    assert res.passed, detail
