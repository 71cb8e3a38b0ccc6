import numpy as np
import pytest

from psido_lab.grid import Field, Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid8():
    return Grid(1, 2 * np.pi, 8)


def random_field(grid, rng, complex_=True):
    v = rng.normal(size=grid.shape)
    if complex_:
        v = v + 1j * rng.normal(size=grid.shape)
    return Field.spatial(grid, v)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
