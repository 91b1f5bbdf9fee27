import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_pseudo(rng, n):
    """Pseudo-sample with random rank pairs."""
    from evgof.empirical import PseudoSample

    u = (rng.permutation(n) + 1.0) / (n + 1.0)
    v = (rng.permutation(n) + 1.0) / (n + 1.0)
    return PseudoSample(u, v)
