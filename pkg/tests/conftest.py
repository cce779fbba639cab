import numpy as np
import pytest
from numpy.polynomial import Polynomial
from numpy.polynomial import chebyshev as C

from chebband.domain import IntervalSystem
from chebband.potential import build_table

GENUS1 = (-1.0, -0.4, 0.2, 1.0)
GENUS2 = (-1.0, -0.6, -0.3, 0.1, 0.4, 1.0)

# one line per acceptance criterion, echoed in the terminal summary
CRITERION_LINES: list[str] = []


def preimage_system(p: Polynomial) -> IntervalSystem:
    """E = p^{-1}([-1, 1]) for a real polynomial whose level sets are real; double roots merge bands."""
    r = np.concatenate([(p - 1).roots(), (p + 1).roots()])
    r = np.sort(r.real[np.abs(r.imag) < 1e-9])
    ends: list[float] = []
    for v in r:
        if ends and abs(v - ends[-1]) < 1e-6:
            ends.pop()
            continue
        ends.append(float(v))
    return IntervalSystem(tuple(ends))


def t3() -> Polynomial:
    return Polynomial(C.cheb2poly([0, 0, 0, 1]))


@pytest.fixture(scope="session")
def table1():
    return build_table(IntervalSystem(GENUS1))


@pytest.fixture(scope="session")
def table2():
    return build_table(IntervalSystem(GENUS2))


@pytest.fixture(scope="session")
def table_t3():
    """Three bands with harmonic measures 1/3: (1.5 T_3)^{-1}([-1, 1])."""
    return build_table(preimage_system(1.5 * t3()))


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERION_LINES:
            terminalreporter.write_line(line)
