import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from wienerhopf.realization import TwoSidedRealization  # noqa: E402

settings.register_profile(
    "default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def scalar_z():
    return TwoSidedRealization.build(0.0, ([[0.0]], [[1.0]], [[1.0]]))


def scalar_inv_z():
    return TwoSidedRealization.build(0.0, None, ([[0.0]], [[1.0]], [[1.0]]))


def two_plus_z():
    return TwoSidedRealization.build(2.0, ([[0.0]], [[1.0]], [[1.0]]))


def one_plus_z():
    return TwoSidedRealization.build(1.0, ([[0.0]], [[1.0]], [[1.0]]))


def identity(m):
    return TwoSidedRealization.constant(np.eye(m))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
