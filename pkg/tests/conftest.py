import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("ldg", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ldg")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(LINES):
            terminalreporter.write_line(LINES[number])
