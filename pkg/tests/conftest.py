import math

import numpy as np
import pytest

from blipfield.core import make_grid


def direct_dft(values, grid):
    """O(n^2) forward transform written straight from the definition."""
    x = grid.positions
    k = grid.wavenumbers
    return grid.dx / math.sqrt(2 * math.pi) * np.exp(-1j * np.outer(k, x)) @ values


def direct_idft(values, grid):
    x = grid.positions
    k = grid.wavenumbers
    return grid.dk / math.sqrt(2 * math.pi) * np.exp(1j * np.outer(x, k)) @ values


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def grid():
    return make_grid(1024, 64.0)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    return request.config.stash.setdefault(_ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda ln: int(ln.split()[1])):
            terminalreporter.write_line(line)
