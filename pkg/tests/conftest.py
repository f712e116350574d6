import numpy as np
import pytest

from shufflesum.sampling import RngStream


@pytest.fixture
def rng():
    return RngStream(12345)


def within_ci(samples, target, k=3.0, var=None):
    """True if the sample mean is within k standard errors of ``target``."""
    x = np.asarray(samples, dtype=float)
    v = x.var(ddof=1) if var is None else var
    return abs(x.mean() - target) <= k * np.sqrt(v / len(x)) + 1e-12


# acceptance results collected by tests/test_acceptance.py: number -> (ok, detail)
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
