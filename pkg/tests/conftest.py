import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from dimer_rdmft.model import InteractionParams, RealRdm, Rdm, SingletState

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
coupling = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def complex_states(draw):
    v = np.array([complex(draw(finite), draw(finite)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([0, 0, 1.0 + 0j]), 1.0
    return SingletState.from_vector(v / n)


@st.composite
def real_states(draw):
    v = np.array([draw(finite) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([0, 0, 1.0]), 1.0
    return SingletState.from_vector(v / n)


@st.composite
def disk_points(draw, rmax=0.5):
    rho = draw(st.floats(0.0, rmax))
    th = draw(st.floats(0.0, 2 * np.pi))
    return RealRdm(0.5 + rho * np.cos(th), rho * np.sin(th))


@st.composite
def complex_disk_points(draw, rmax=0.5):
    r = draw(disk_points(rmax))
    ph = draw(st.floats(0.0, 2 * np.pi))
    return Rdm(r.g11, r.g12 * np.exp(1j * ph))


@st.composite
def interactions(draw):
    return InteractionParams(draw(coupling), draw(coupling), draw(coupling))


def random_disk(rng, n, rmax=0.5):
    rho = rmax * np.sqrt(rng.uniform(size=n))
    th = rng.uniform(0, 2 * np.pi, n)
    return 0.5 + rho * np.cos(th), rho * np.sin(th)


def disk_grid_points(n):
    g11 = np.linspace(0.0, 1.0, n)
    g12 = np.linspace(-0.5, 0.5, n)
    A, B = np.meshgrid(g11, g12, indexing="ij")
    m = (A - 0.5) ** 2 + B**2 <= 0.25 + 1e-12
    return A[m], B[m]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
