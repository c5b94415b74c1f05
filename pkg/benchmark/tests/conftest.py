import math

import numpy as np
import pytest

from spikeslab.feasibility import empirical_feasibility
from spikeslab.prior import (GaussianSlab, IidGaussian, LaplaceSlab, LinearModel, RegressionInstance,
                             SpikeSlabPrior, simulate_instance)
from spikeslab.utils import set_quiet

set_quiet(True)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope='session')
def gaussian_prior():
    return SpikeSlabPrior(q=0.5, slab=GaussianSlab(variance=1.0))


@pytest.fixture(scope='session')
def laplace_prior():
    return SpikeSlabPrior(q=0.3, slab=LaplaceSlab(rate=math.sqrt(2.0)))


@pytest.fixture(scope='session')
def toy_model():
    """q = 0.3, N(0, 1) slab, sigma_d = 1, n = 20, d = 10, X_ij ~ N(0, 1/(4d))."""
    return LinearModel(n=20, d=10, prior=SpikeSlabPrior(q=0.3, slab=GaussianSlab()),
                       design=IidGaussian(variance=1.0 / 40), noise_std=1.0)


@pytest.fixture(scope='session')
def toy_case(toy_model):
    """(seed, theta, instance) of the first feasible draw of the toy setting."""
    for seed in range(50):
        theta, instance = simulate_instance(toy_model, seed)
        if empirical_feasibility(instance.X, instance.noise_std, toy_model.prior).feasible:
            return seed, theta, instance
    pytest.fail('no feasible toy instance among 50 seeds')


@pytest.fixture(scope='session')
def toy_instance(toy_case):
    return toy_case[2]


@pytest.fixture(scope='session')
def small_instance():
    """d = 5 instance with a moderate signal."""
    rng = np.random.default_rng(7)
    X = rng.normal(0.0, 0.3, (30, 5))
    theta = np.array([1.0, 0.0, -0.5, 0.0, 0.0])
    y = X @ theta + rng.standard_normal(30)
    return RegressionInstance(X=X, y=y, noise_std=1.0)
