import os

import pytest
from hypothesis import HealthCheck, settings

from surfdyn import presets
from surfdyn.surfaces import SurfacePoint, TripleSurface, find_points

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def wehler():
    return presets.wehler_surface()


@pytest.fixture(scope="session")
def triple():
    return presets.triple_surface()


@pytest.fixture(scope="session")
def wehler_points(wehler):
    return find_points(wehler, 3)


@pytest.fixture(scope="session")
def triple_points(triple):
    return find_points(triple, 2)


def singular_triple():
    """Triple fixture with the four coefficients touching x0^2 y0^2 z0^2 zeroed.

    The surface is then singular at ((1:0),(1:0),(1:0)); every residual
    quadratic through that point has a double root there, so f fixes it.
    """
    C = [[list(r) for r in m] for m in presets.TRIPLE_C]
    for i, j, k in ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)):
        C[i][j][k] = 0
    return TripleSurface(C)


FIXED_POINT = SurfacePoint.of((1, 0), (1, 0), (1, 0))


@pytest.fixture(scope="session")
def fixed_surface():
    return singular_triple()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT):
            terminalreporter.write_line(line)
