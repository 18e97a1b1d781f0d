import numpy as np
import pytest

from mcsdiss.spectral import ModelParams


@pytest.fixture
def fig1_params():
    # e=1, sqrt(2 sigma) kappa = 0.01, |dq|/sqrt(2 sigma) = 0.01
    return ModelParams(m=1.0, omegas=(1.0, 1.0), e=1.0, kappa=0.01, sigma=0.5,
                       positions=((0.0, 0.0), (0.01, 0.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
