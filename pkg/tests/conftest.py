import numpy as np
import pytest

from gpground import Params, SolverConfig, make_grid, solve
from gpground.analysis import sweep


@pytest.fixture(scope="session")
def grid():
    return make_grid(12.0, 1024)


@pytest.fixture(scope="session")
def coarse_grid():
    return make_grid(12.0, 512)


@pytest.fixture(scope="session")
def fast_cfg():
    return SolverConfig(dtau=1e-2)


@pytest.fixture(scope="session")
def ground_states(grid, fast_cfg):
    """Converged ground states keyed by lambda (V0 = 0)."""
    return {lam: solve(grid, Params(lam), fast_cfg) for lam in (-2.0, -1.0, 0.0, 1.0, 2.0)}


@pytest.fixture(scope="session")
def sweep33(grid, fast_cfg):
    return sweep(-8.0, 8.0, 33, Params(), grid, fast_cfg)


@pytest.fixture(scope="session")
def sweep65(grid, fast_cfg):
    return sweep(-8.0, 8.0, 65, Params(), grid, fast_cfg)


@pytest.fixture()
def rng():
    return np.random.default_rng(7)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
