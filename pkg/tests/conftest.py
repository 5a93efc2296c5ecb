import pytest
from hypothesis import HealthCheck, settings

from vacuumfront.affine import integrate_correction
from vacuumfront.barenblatt import solve_profile_constants

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def p1():
    return solve_profile_constants(2.0, 1.0, 1)


@pytest.fixture(scope="session")
def p3():
    return solve_profile_constants(2.0, 1.0, 3)


@pytest.fixture(scope="session")
def corr1():
    return integrate_correction(2.0, 1, 1.0e4 * (1 + 1e-9))


@pytest.fixture(scope="session")
def corr3():
    return integrate_correction(2.0, 3, 1.0e4 * (1 + 1e-9))


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
