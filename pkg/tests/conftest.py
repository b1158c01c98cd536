import numpy as np
import pytest

from lethe._rng import substream
from lethe.adversary import DAY
from lethe.tuning import TuningSpec, build_mechanism

# Appendix-style reference shape parameters: decision-threshold days -> n
SHAPE_TABLE = {30: 6e-4, 60: 3e-4, 90: 2e-4, 120: 1.5e-4, 150: 1.2e-4, 180: 1e-4}


@pytest.fixture(scope="session")
def mechanism_90():
    """Geometric(9 h) up, negative-binomial(1 h) down tuned for theta* = 30 d."""
    return build_mechanism(TuningSpec(0.90, 3600.0, 30 * DAY))


def rng(*key) -> np.random.Generator:
    return substream(20240801, *key)
