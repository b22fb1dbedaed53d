"""The ten acceptance criteria, one test each, at their stated tolerances.

Each test prints a single ``[PASS]``/``[FAIL]`` line; run with ``-s`` (or read
``test_output.txt``) to see the measured values.
"""
import numpy as np
import pytest

from dulac import acceptance


@pytest.mark.parametrize("check", acceptance.CHECKS, ids=lambda c: c.__name__)
def test_criterion(check, capsys):
    res = check()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()


def test_sextic_root_against_numpy():
    # independent float oracle for the interval result of criterion 2
    res = acceptance.check_2()
    coeffs = [4, -12, -4, 28, 56, -72, -229]
    real = sorted(r.real for r in np.roots(coeffs) if abs(r.imag) < 1e-9)
    assert len(real) == 2
    assert res.data["b_lower"] == pytest.approx(real[0], abs=1e-9)
    assert res.data["b_upper"] == pytest.approx(real[1], abs=1e-9)
