import pytest
from hypothesis import HealthCheck, settings

from schottky_zeta.groups import bundled

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def sample():
    return bundled("sample")


@pytest.fixture(scope="session")
def real_a():
    return bundled("real_a")


@pytest.fixture(scope="session")
def real_b():
    return bundled("real_b")


@pytest.fixture(scope="session")
def rank1():
    return bundled("rank1")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
