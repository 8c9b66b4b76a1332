import math

import pytest
from hypothesis import HealthCheck, settings

from persuasion import ProcessParams, solve

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LN3_OVER_4 = math.log(3) / 4


@pytest.fixture
def base_large():
    """Optimal-policy figure parameters with a non-binding initial variance."""
    return ProcessParams(kappa=-0.5, sigma=2.0, r=3.0, sigma0_sq=1e6)


@pytest.fixture
def base_shifted():
    return ProcessParams(kappa=-0.5, sigma=2.0, r=3.0, sigma0_sq=2.0)


@pytest.fixture
def sol_large(base_large):
    return solve(base_large, 3.0)


@pytest.fixture
def sol_shifted(base_shifted):
    return solve(base_shifted, 3.0)


_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
