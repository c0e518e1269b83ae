import numpy as np
import pytest

from lensfix import filament, plummer, point_mass, point_mass_ensemble
from lensfix.algebra import BiPoly, RationalFn
from lensfix.lens import raw_model


def builtin_models():
    return {
        "point": point_mass(1.0),
        "binary": point_mass_ensemble([0.5, 0.5], [-0.5, 0.5]),
        "plummer": plummer(1.0, 0.5),
        "filament": filament(0.125),
    }


def identity_model():
    """alpha = 0, written as U = 0 over V = 1."""
    zero = RationalFn(BiPoly.zero(), BiPoly.constant(1.0))
    return raw_model(zero, zero, name="identity")


@pytest.fixture(params=list(builtin_models()))
def model(request):
    return builtin_models()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bipoly(rng, d1, d2):
    c = rng.normal(size=(d1 + 1, d2 + 1)) + 1j * rng.normal(size=(d1 + 1, d2 + 1))
    return BiPoly(c)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
