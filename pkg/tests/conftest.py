import time

import pytest

from fsperturb import helium, quadrature

ACCEPTANCE_LINES = []


class _HeliumCache:
    """Kernel sums on the table grids are expensive; compute each index once per session."""

    def __init__(self):
        self._data = {}

    def get(self, index, orientation="swapped"):
        key = (index, orientation)
        if key not in self._data:
            t0 = time.perf_counter()
            grid = quadrature.build_grid(quadrature.indexed_spec(index))
            consts, pm = helium.compute_constants(grid, orientation=orientation, source=f"index {index}")
            self._data[key] = (consts, pm, time.perf_counter() - t0)
        return self._data[key]


@pytest.fixture(scope="session")
def helium_cache():
    return _HeliumCache()


@pytest.fixture(scope="session")
def grid4():
    return quadrature.build_grid(quadrature.indexed_spec(4))


@pytest.fixture(scope="session")
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
