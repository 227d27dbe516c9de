import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

import audit  # noqa: E402
from infodesign.core import Entropy, Indicator  # noqa: E402

audit.install()
ACCEPTANCE_LINES = []

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture
def instance_a():
    """Vote indicator at 0.6 plus entropy, prior Pr(x1) = 0.3."""
    return np.array([0.7, 0.3]), [Indicator(0.6), Entropy()]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_collection_modifyitems(session, config, items):
    # acceptance runs last so the support audit has seen the whole suite
    items.sort(key=lambda item: item.nodeid.startswith("tests/test_acceptance.py") or
               item.fspath.basename == "test_acceptance.py")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
    terminalreporter.write_line(
        f"support audit: {audit.total()} structures checked, {len(audit.VIOLATIONS)} violations")
