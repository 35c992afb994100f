import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dtqw_lab.coin import CoinSpec

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def coin_specs(draw, phase=True):
    theta = draw(st.floats(0.05, 2 * math.pi - 0.05))
    z = draw(st.floats(-1.0, 1.0))
    az = draw(st.floats(0.0, 2 * math.pi))
    r = math.sqrt(max(0.0, 1 - z * z))
    axis = (r * math.cos(az), r * math.sin(az), z)
    norm = math.sqrt(sum(a * a for a in axis))
    axis = tuple(a / norm for a in axis)
    delta = draw(st.floats(-math.pi, math.pi)) if phase else 0.0
    return CoinSpec(theta, axis, delta)


def random_spec(rng: np.random.Generator, phase: bool = True) -> CoinSpec:
    v = rng.normal(size=3)
    return CoinSpec(
        float(rng.uniform(0.05, 2 * np.pi - 0.05)),
        tuple(v / np.linalg.norm(v)),
        float(rng.uniform(-np.pi, np.pi)) if phase else 0.0,
    )


def random_amplitudes(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
    return a / np.linalg.norm(a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
