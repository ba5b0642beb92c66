import numpy as np
import pytest

from vaarange import RadioConfig, VaaGeometry


@pytest.fixture
def radio_small():
    return RadioConfig(num_positions=6, num_subcarriers=12, subcarrier_spacing=1e6, wavelength=0.125)


@pytest.fixture
def radio_full():
    return RadioConfig()


def random_geometry(radio: RadioConfig, rng: np.random.Generator) -> VaaGeometry:
    wl = radio.wavelength
    steps = rng.uniform(0.25 * wl, 0.5 * wl, radio.num_positions - 1)
    directions = np.concatenate([[0.0], rng.uniform(-np.pi / 4, np.pi / 4, radio.num_positions - 1)])
    return VaaGeometry(np.concatenate([[0.0], np.cumsum(steps)]), directions, wl)


@pytest.fixture
def geometry_small(radio_small):
    return random_geometry(radio_small, np.random.default_rng(17))


@pytest.fixture
def geometry_full(radio_full):
    return random_geometry(radio_full, np.random.default_rng(17))
