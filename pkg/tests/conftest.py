import numpy as np
import pytest

from ellipsoid_geodesics.geometry import EllipsoidSpec, random_leaf_point

GENERIC_ALPHAS = (1 / 3, 1.0, 3.0, 4.0)
SYMMETRIC_ALPHAS = (1.0, 2.0, 2.0, 4.0)


@pytest.fixture
def generic():
    return EllipsoidSpec(GENERIC_ALPHAS)


@pytest.fixture
def symmetric():
    return EllipsoidSpec(SYMMETRIC_ALPHAS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def leaf_points(spec, n, seed=0, h=0.5, margin=0.0):
    rng = np.random.default_rng(seed)
    return [random_leaf_point(spec, rng, h=h, margin=margin) for _ in range(n)]


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULT_LINES

    if RESULT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULT_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
