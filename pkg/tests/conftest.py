import numpy as np
import pytest
from hypothesis import settings

from anosov import zoo

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fuchsian():
    return zoo.fuchsian_free(2, 2.0)


@pytest.fixture(scope="session")
def sym2(fuchsian):
    return zoo.lift(fuchsian, "sym", q=2)


@pytest.fixture(scope="session")
def trivial():
    return zoo.trivial_rep(2, 2)


@pytest.fixture(scope="session")
def octagon():
    return zoo.surface_octagon()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
