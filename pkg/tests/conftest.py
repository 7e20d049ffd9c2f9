import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("suite")

CHAIN_SPEC = """\
node X1 continuous
node X2 continuous
node X3 continuous
edge X1 -> X2 : ls
edge X1 -> X3 : ls
edge X2 -> X3 : cs
"""

MIXED_SPEC = """\
node X1 continuous
node X2 continuous
node X3 ordinal 4
edge X1 -> X2 : ls
edge X1 -> X3 : ls
edge X2 -> X3 : ls
"""


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain_spec_text():
    return CHAIN_SPEC


@pytest.fixture
def mixed_spec_text():
    return MIXED_SPEC
