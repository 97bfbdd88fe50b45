import numpy as np
import pytest

import starshapeopt as so


@pytest.fixture(scope="session")
def mesh8():
    return so.generate_disk_mesh(8)


@pytest.fixture(scope="session")
def mesh16():
    return so.generate_disk_mesh(16)


@pytest.fixture(scope="session")
def disk_data():
    return so.builtin("disk").data


@pytest.fixture(scope="session")
def zero_data():
    return so.ProblemData(source=lambda p: np.zeros(len(p)),
                          target=lambda p: np.zeros(len(p)),
                          target_gradient=lambda p: np.zeros_like(p))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def random_gradient_and_shape(rng, n, form="volume"):
    """Random projected-derivative data and a positive shape for engine tests."""
    shape = so.RadialShape(1.0 + 0.8 * rng.random(n))
    h_bar = rng.normal(size=n)
    H_bar = rng.normal(size=n) if form == "volume" else np.zeros(n)
    return so.ShapeGradient(form=form, h_bar=h_bar, H_bar=H_bar), shape


@pytest.fixture(scope="session")
def mesh32():
    return so.generate_disk_mesh(32)


def smooth_profile(rng, n, kmax=4):
    """Random low-harmonic profile, the regime projected derivatives live in."""
    import starshapeopt.circle as circle
    phi = circle.node_angles(n)
    out = np.zeros(n)
    for k in range(1, kmax + 1):
        out += rng.normal() * np.cos(k * phi) + rng.normal() * np.sin(k * phi)
    return out


def smooth_gradient_and_shape(rng, n, kmax=4):
    shape = so.RadialShape(1.0 + 0.8 * rng.random(n))
    return so.ShapeGradient(form="volume", h_bar=smooth_profile(rng, n, kmax),
                            H_bar=smooth_profile(rng, n, kmax)), shape
