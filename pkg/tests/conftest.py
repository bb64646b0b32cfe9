import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from exptail import DistributionModel, YoungFunction, sample

settings.register_profile(
    "default", deadline=None, max_examples=30,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def quad1():
    return YoungFunction.quadratic([[1.0]])


@pytest.fixture(scope="session")
def quad2():
    return YoungFunction.quadratic(np.eye(2))


@pytest.fixture(scope="session")
def gauss1_samples():
    return sample(DistributionModel.gaussian([[1.0]]), 200_000, 11)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def report_criterion(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config._acceptance_lines

    def record(k, ok, detail):
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append((k, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
