import os

import pytest
from hypothesis import HealthCheck, settings

from qfheight.poly import PrimeContext, parse_polynomial

settings.register_profile("repro", derandomize=True, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))


@pytest.fixture
def P():
    """Parse in exact mode, or in Z/p^K when p is given."""
    def parse(text, p=None, K=1):
        return parse_polynomial(text, PrimeContext(p, K) if p else None)
    return parse


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
