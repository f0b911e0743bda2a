import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from apweights import GridSpec, StepFunction, Weight  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def f1():
    g = GridSpec(1, 2)
    return Weight(np.array([1.0, 1.0, 1.0, 4.0]), g), StepFunction(np.array([0.0, 0.0, 0.0, 4.0]), g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rand_weight(g, rng, spread=1.0):
    return Weight(np.exp(rng.normal(0.0, spread, g.shape)), g)


def rand_func(g, rng, zeros=False):
    v = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), g.shape))
    if zeros:
        v = v * (rng.random(g.shape) < 0.6)
        if not v.any():
            v.flat[0] = 1.0
    return StepFunction(v, g)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
