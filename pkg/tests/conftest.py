import numpy as np
import pytest

from iontweezer.chain import ConventionalTrap, make_chain

FIG1_HZ = (1.2e6, 1.0e6, 0.2e6)


@pytest.fixture
def fig1_trap():
    return ConventionalTrap.from_hz(*FIG1_HZ)


@pytest.fixture
def yb5(fig1_trap):
    return make_chain(["Yb171"] * 5, fig1_trap)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE_KEY]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
