import functools

import pytest

from cquant import kernels
from cquant.geometry import Side, TriangleConfig
from cquant.oracle import GridSpec, grid_search, restricted_grid_search

ACCEPTANCE_LINES: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def oracle_run(n: int, side: str | None = None, apex: tuple | None = None):
    """Grid oracle at the default spec, shared between test modules."""
    cfg = TriangleConfig(2.0, apex) if apex else TriangleConfig.canonical()
    if side is None:
        return grid_search(n, cfg, GridSpec())
    return restricted_grid_search(n, Side[side], cfg, GridSpec())


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.get_backend(request.param)


@pytest.fixture
def canonical():
    return TriangleConfig.canonical()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
