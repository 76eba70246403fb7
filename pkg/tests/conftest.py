import sys

import pytest

from affine_rmatrix.rmatrix import TensorSetup, assemble_R
from affine_rmatrix.rootdata import affine_cartan

WEIGHT_PAIRS = [((1, 2, 0), (2, 1, 0)), ((3, -1, 2), (1, 0, -1))]


@pytest.fixture(scope="session")
def cartan():
    return affine_cartan("A1")


@pytest.fixture(scope="session")
def pair_setups(cartan):
    """N=4 tensor setups for the two weight pairs, with assembled R."""
    out = []
    for lam, mu in WEIGHT_PAIRS:
        s = TensorSetup(cartan, [lam, mu], 4)
        out.append((s, assemble_R(s)))
    return out


@pytest.fixture(scope="session")
def box_setup(cartan):
    # reaches total degree 3*delta without the full height-6 space
    s = TensorSetup(cartan, [(1, 2, 0), (2, 1, 0)], 6, box=(3, 3))
    return s, assemble_R(s)


@pytest.fixture(scope="session")
def one_leg4(cartan):
    return TensorSetup(cartan, [(1, 2, 0)], 4)


def pytest_terminal_summary(terminalreporter):
    # one line per acceptance criterion, shown even when output is captured
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
