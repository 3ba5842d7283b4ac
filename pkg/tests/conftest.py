import numpy as np
import pytest

from airy_nonlocal import FunctionSpec, SolverConfig, make_manufactured_invp, make_manufactured_periodic

INTERIOR_X = tuple(np.round(np.arange(1, 10) * 0.1, 12))
GRID_T = (0.1, 0.5, 1.0)


@pytest.fixture(scope="session")
def K_one():
    return FunctionSpec.polynomial([1.0])


@pytest.fixture(scope="session")
def mode_case(K_one):
    """u = e^{i(x+t)} with K = 1."""
    return make_manufactured_invp([(1.0, 1.0)], K_one)


@pytest.fixture(scope="session")
def periodic_case(K_one):
    """q = e^{2ix + 8it}, period 2 pi."""
    return make_manufactured_periodic([(8, 0)], 1.0, K_one)


@pytest.fixture(scope="session")
def grid_points():
    return [(x, t) for t in GRID_T for x in INTERIOR_X]


@pytest.fixture(scope="session")
def fast_cfg():
    return SolverConfig(check_zeros=False)


ACCEPTANCE_LINES = []


@pytest.fixture
def report_criterion():
    """Record and print one pass/fail line, then assert the criterion."""

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
