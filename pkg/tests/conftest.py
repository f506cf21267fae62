import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sbl.catalog import get_metric

settings.register_profile(
    "sbl",
    deadline=None,
    max_examples=15,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("sbl")

METRICS_3D = [
    ("euclidean3", {}),
    ("sphere3", {"c": 1.0}),
    ("hyperbolic3", {"c": -1.0}),
    ("halfspace", {}),
    ("heisenberg", {}),
    ("perturbed", {"eps": 0.05}),
]
METRICS_2D = [("flat2d", {}), ("sphere2", {"c": 1.0}), ("hyperbolic2", {"c": -1.0}), ("perturbed2d", {"eps": 0.05})]


def metric_id(case):
    name, params = case
    return name + "".join(f"-{k}{v:g}" for k, v in params.items())


@pytest.fixture(scope="session")
def sphere3():
    return get_metric("sphere3", c=1.0)


@pytest.fixture(scope="session")
def perturbed():
    return get_metric("perturbed", eps=0.05)


@pytest.fixture(scope="session")
def heisenberg():
    return get_metric("heisenberg")


@pytest.fixture(scope="session")
def flat():
    return get_metric("euclidean3")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, repeated in the terminal summary
CRITERIA_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES):
            terminalreporter.write_line(line)
