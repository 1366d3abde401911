import pytest

from plausdeny.estimators import train
from plausdeny.world import build_world


@pytest.fixture(scope="session")
def world():
    return build_world(0)


@pytest.fixture(scope="session")
def estimator(world):
    return train(world.corpus, normalizer=world.normalizer)


@pytest.fixture(scope="session")
def observer(world):
    return world.observer()


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
