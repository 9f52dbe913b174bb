import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Property tests call into quadrature and jit-compiled kernels whose first
# invocation is slow; wall-clock deadlines only produce flaky failures there.
settings.register_profile(
    "rfdiv",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("rfdiv")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
