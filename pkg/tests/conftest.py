import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from coevo.model import REFERENCE_PARAMS, ModelParams

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def regime_params(draw, max_gamma=20.0):
    """Parameter sets with tau < gamma and kappa > sigma + alpha + 1."""
    gamma = draw(st.floats(0.5, max_gamma))
    tau = gamma * draw(st.floats(0.005, 0.95))
    mu = draw(st.floats(0.05, 3.0))
    alpha = draw(st.floats(0.0, 1.5))
    sigma = draw(st.floats(0.0, 1.5))
    kappa = sigma + alpha + 1.0 + draw(st.floats(0.01, 4.0))
    return ModelParams(gamma, tau, mu, alpha, kappa, sigma)


def draw_regime(rng: np.random.Generator) -> ModelParams:
    gamma = rng.uniform(2.0, 20.0)
    tau = gamma * rng.uniform(0.005, 0.3)
    mu = rng.uniform(0.1, 1.0)
    alpha = rng.uniform(0.0, 1.0)
    sigma = rng.uniform(0.0, 1.0)
    kappa = sigma + alpha + 1.0 + rng.uniform(0.05, 2.0)
    return ModelParams(gamma, tau, mu, alpha, kappa, sigma)


@pytest.fixture
def ref_params():
    return REFERENCE_PARAMS


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
