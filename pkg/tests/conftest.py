import numpy as np
import pytest

from renyi_reach.sampling import RngSeed, random_density


@pytest.fixture
def running_pair():
    """The qubit-qubit example used throughout: rho_S = diag(0.6, 0.4), rho_E = diag(0.9, 0.1)."""
    return np.diag([0.6, 0.4]).astype(complex), np.diag([0.9, 0.1]).astype(complex)


def random_pairs(n, d, seed=0):
    for t in range(n):
        gen = RngSeed(seed, t).generator()
        yield random_density(d, gen), random_density(d, gen)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
