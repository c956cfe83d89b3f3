import math

import numpy as np
import pytest

from qhmm import classical, models


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def market():
    return classical.market_model()


@pytest.fixture(scope="session")
def gaussian4():
    return classical.gaussian4_model()


@pytest.fixture(scope="session")
def monras():
    return models.monras_qhmm()


@pytest.fixture(scope="session")
def damping_model():
    return models.amplitude_damping_model(math.pi / 2)


@pytest.fixture(scope="session")
def damping_qhmm():
    return models.amplitude_damping_qhmm(math.pi / 2)
