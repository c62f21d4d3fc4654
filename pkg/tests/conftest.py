import numpy as np
import pytest

from okp.core import Instance
from okp.runner import available_backends


def inst(items, bounds=None):
    """Shorthand: build an Instance from (value, weight) pairs."""
    return Instance.from_items(items, bounds=bounds)


@pytest.fixture(params=available_backends())
def backend(request):
    """Run the test once per installed decision-loop backend."""
    return request.param


def rng(seed=0):
    return np.random.default_rng(seed)


# Filled by test_acceptance.py; printed after the run so the one-line
# verdicts survive output capture.
acceptance_results = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_results:
        return
    terminalreporter.section("acceptance")
    for num, ok, line in sorted(acceptance_results):
        terminalreporter.write_line(f"[{num:2d}] {'PASS' if ok else 'FAIL'} {line}")
