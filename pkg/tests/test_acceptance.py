"""Acceptance criteria 1-12 at their stated tolerances.

Each test prints one line of the form ``criterion  k PASS|FAIL name``. The pair
runs behind criteria 8 and 9 are cached at module level and shared. Expect
about fifteen minutes of wall time.
"""

import pytest

from dnlslab import acceptance


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(number, capsys):
    result = acceptance.run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
