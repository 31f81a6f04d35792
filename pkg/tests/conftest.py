import time

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from sipns.kernels import PARAM_NAMES
from sipns.model import MarketState, ModelParams, Scenario

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def params():
    return ModelParams.default()


@pytest.fixture
def scenario():
    return Scenario.default()


def random_params(rng, low=1e-3, high=1.0) -> ModelParams:
    """Every rate log-uniform in [low, high]."""
    values = np.exp(rng.uniform(np.log(low), np.log(high), size=len(PARAM_NAMES)))
    return ModelParams.from_array(values)


log_rate = st.floats(min_value=-3.0, max_value=0.0).map(lambda x: 10.0**x)


@st.composite
def model_params(draw):
    return ModelParams(**{name: draw(log_rate) for name in PARAM_NAMES})


@st.composite
def market_states(draw, high=200.0):
    comp = st.floats(min_value=0.0, max_value=high, allow_nan=False)
    return MarketState(draw(comp), draw(comp), draw(comp), draw(comp))


SUITE_BUDGET = 600.0
_session = {}


def pytest_sessionstart(session):
    _session["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
        elapsed = time.perf_counter() - _session["start"]
        mark = "PASS" if elapsed < SUITE_BUDGET else "FAIL"
        terminalreporter.write_line(f"[{mark}] 9 suite wall-clock: {elapsed:.1f} s (budget {SUITE_BUDGET:.0f} s)")
