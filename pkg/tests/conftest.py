import math

import pytest

from isoprofile.geometry import validate_model

TWO_PI = 2 * math.pi


def cos_x_model(amp=0.1, extra=()):
    modes = [{"kx": 1, "ky": 0, "cos": amp, "sin": 0.0}, *extra]
    return validate_model({"type": "conformal_torus", "sides": [TWO_PI, TWO_PI], "phi": modes})


@pytest.fixture(scope="session")
def torus2pi():
    return validate_model({"type": "flat_torus", "sides": [TWO_PI, TWO_PI]})


@pytest.fixture(scope="session")
def torus3():
    return validate_model({"type": "flat_torus", "sides": [3.0, 2.0, 4.0]})


@pytest.fixture(scope="session")
def sphere1():
    return validate_model({"type": "sphere", "radius": 1.0})


@pytest.fixture(scope="session")
def flat_conformal():
    return validate_model({"type": "conformal_torus", "sides": [TWO_PI, TWO_PI], "phi": []})


@pytest.fixture(scope="session")
def const_conformal():
    # phi = 0.3 written as a (0, 0) mode
    return validate_model({"type": "conformal_torus", "sides": [TWO_PI, TWO_PI],
                           "phi": [{"kx": 0, "ky": 0, "cos": 0.3, "sin": 0.0}]})


@pytest.fixture(scope="session")
def cos_x():
    return cos_x_model()


@pytest.fixture(scope="session")
def cos_xy():
    return cos_x_model(extra=[{"kx": 0, "ky": 1, "cos": 0.05, "sin": 0.0}])
