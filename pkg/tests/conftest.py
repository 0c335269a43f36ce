import os

import numpy as np
import pytest

from maxinc import _accel

# acceptance criteria report lines, filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
    if os.environ.get("MAXINC_DISABLE_NUMBA"):
        terminalreporter.write_line("(numba disabled: pure-numpy kernels)")
