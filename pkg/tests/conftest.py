import pytest

from modelsets.cps import Scheme, Window
from modelsets.ellis import EllisSystem
from modelsets.qfield import QF, qv


@pytest.fixture(scope="session")
def octagon():
    return EllisSystem.from_preset("octagon")


@pytest.fixture(scope="session")
def fibonacci():
    return EllisSystem.from_preset("fibonacci")


@pytest.fixture(scope="session")
def square_lattice_star():
    """Synthetic scheme whose x-axis stabilizer has a lattice star image.

    Star generators (1,0), (0,1), (0,r2), (1/2,0); physical generators chosen
    to keep the projection injective.  The x-axis hyperplane fails the
    density condition, the y-axis one passes.
    """
    D = 2
    gens = [
        (qv(["1", "0"], D), qv(["1", "0"], D)),
        (qv(["0", "1"], D), qv(["0", "1"], D)),
        (qv([QF(0, 1, D), "0"], D), qv(["0", QF(0, 1, D)], D)),
        (qv(["0", QF(0, 1, D)], D), qv([QF("1/2"), "0"], D)),
    ]
    scheme = Scheme(2, 2, D, gens)
    window = Window.canonical(scheme)
    return EllisSystem(scheme, window)


def pytest_addoption(parser):
    parser.addoption(
        "--skip-slow",
        action="store_true",
        default=False,
        help="skip the long acceptance checks",
    )
