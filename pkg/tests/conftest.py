import numpy as np
import pytest

from scenetext.resources import Resources
from scenetext.typeset import FontCatalog


@pytest.fixture(scope="session")
def catalog():
    return FontCatalog.default()


@pytest.fixture(scope="session")
def resources():
    return Resources.load()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(name, ok, detail)``; fails the test when not ok."""
    def record(name, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        request.config.stash[ACCEPTANCE].append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
