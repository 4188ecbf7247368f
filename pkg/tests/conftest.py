import random

import pytest
from hypothesis import HealthCheck, settings

from polyorbit.precision import PrecisionConfig

settings.register_profile(
    "numeric", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")


@pytest.fixture(autouse=True)
def working_precision():
    PrecisionConfig(working_digits=50).activate()
    yield


@pytest.fixture
def rng():
    return random.Random(20260811)
