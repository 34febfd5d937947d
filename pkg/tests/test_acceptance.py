"""The ten acceptance criteria at their stated tolerances.

One test per criterion; each prints its pass/fail line (shown in the
pytest terminal summary).  Run directly with ``python3 tests/test_acceptance.py``
for the bare table.
"""

import pytest

from jordanchain.acceptance import CHECKS, run_all

RESULTS = {}


@pytest.mark.parametrize("index", range(len(CHECKS)), ids=[f"criterion_{i + 1}" for i in range(len(CHECKS))])
def test_criterion(index):
    res = CHECKS[index](1.0)
    RESULTS[res.number] = res
    print(res.line())
    for d in res.details:
        print("    " + d)
    assert res.passed, "\n".join(res.details)


if __name__ == "__main__":
    for r in run_all():
        print(r.line())
