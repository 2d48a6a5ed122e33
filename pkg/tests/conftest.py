import numpy as np
import pytest

from orlicz_kit import pde
from orlicz_kit.grid import Grid, GridFunction


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def square():
    return Grid([(0.0, 1.0), (0.0, 1.0)], 17)


def random_dirichlet(grid, rng, scale=1.0):
    vals = scale * rng.standard_normal(grid.shape)
    vals[grid.boundary_mask] = 0.0
    return GridFunction(grid, vals)


@pytest.fixture(scope="session")
def default_report():
    """One full default two-solution run shared by the PDE and acceptance tests."""
    return pde.solve_two_solutions(pde.default_spec())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
