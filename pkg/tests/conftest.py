import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dmquench.model import ModelParams, QuenchSetup

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

even_L = st.integers(1, 8).map(lambda n: 2 * n)
gammas = st.floats(-1.0, 1.0)
dms = st.floats(-1.0, 1.0)
fields = st.floats(0.0, 2.5)
betas = st.floats(-2.0, 2.0).map(lambda x: 10.0 ** x)


@st.composite
def small_setups(draw, L=even_L, beta=betas):
    params = ModelParams(draw(L), draw(gammas), draw(dms))
    return QuenchSetup(params, draw(fields), draw(fields), draw(beta))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def fig_setup():
    """The low-temperature chain used for the critical-line figures, at desk scale."""
    return QuenchSetup(ModelParams(2000, 0.5, 0.6), 0.8, 0.81, 100.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance") or sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
