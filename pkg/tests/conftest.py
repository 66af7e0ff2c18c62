import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wedgemix.grid import Field

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_pm1(n_exp, rng, dtype=np.int8):
    side = 1 << n_exp
    vals = rng.integers(0, 2, size=(side, side)).astype(dtype) * 2 - 1
    return Field(n_exp, vals.astype(dtype))


def balanced_pm1(n_exp, rng):
    """Random +-1 field with total sum exactly zero."""
    side = 1 << n_exp
    flat = np.ones(side * side, dtype=np.int8)
    flat[: side * side // 2] = -1
    rng.shuffle(flat)
    return Field(n_exp, flat.reshape(side, side))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.REPORT:
        terminalreporter.write_line(line)
