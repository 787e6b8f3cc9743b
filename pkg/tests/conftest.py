import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from matcone.sampling import MonteCarloEstimate, RngState

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def rng():
    return RngState(1234)


def assert_close_z(est: MonteCarloEstimate, want, z_cap: float = 3.0):
    """Assert an estimate matches a reference within the z-score cap."""
    z = est.z_against(want)
    ref = want.value if isinstance(want, MonteCarloEstimate) else want
    assert z <= z_cap, f"z={z:.2f}: got {est.value}+-{est.stderr}, want {ref}"


@pytest.fixture
def spd2():
    return np.array([[0.6, 0.1], [0.1, 0.5]])
