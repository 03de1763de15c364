import pytest
from hypothesis import settings

from indoorprop.floorplan import make_ec21_classroom, make_ece_floor

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def floor():
    return make_ece_floor()


@pytest.fixture(scope="session")
def classroom():
    return make_ec21_classroom()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
