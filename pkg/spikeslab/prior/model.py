from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from spikeslab.utils import ShapeError, Stream, as_generator, make_rng
from .design import DesignSpec, generate_design
from .slabs import SpikeSlabPrior, sample_prior

__all__ = ['RegressionInstance', 'LinearModel', 'generate_response', 'simulate_instance']


class RegressionInstance(BaseModel):
    """Observed data of the linear model y = X theta + eps.

    Attributes:
        X (np.ndarray): n x d design matrix
        y (np.ndarray): response n-vector
        noise_std (float): noise standard deviation sigma_d
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    X: np.ndarray
    y: np.ndarray
    noise_std: float = Field(..., gt=0)

    @field_validator('X', 'y', mode='before')
    @classmethod
    def _as_float_array(cls, value):
        array = np.array(value, dtype=float)
        if not np.all(np.isfinite(array)):
            raise ValueError('entries must be finite')
        array.flags.writeable = False
        return array

    @model_validator(mode='after')
    def _check_shapes(self):
        if self.X.ndim != 2 or self.X.shape[0] < 1 or self.X.shape[1] < 1:
            raise ValueError(f'X must be a non-empty matrix, got shape {self.X.shape}')
        if self.y.shape != (self.X.shape[0],):
            raise ValueError(f'y has shape {self.y.shape}, expected ({self.X.shape[0]},)')
        return self

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


class LinearModel(BaseModel):
    """Generative setting: prior on theta, row law of X and noise level."""
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    prior: SpikeSlabPrior
    design: DesignSpec
    noise_std: float = Field(..., gt=0)


def generate_response(X: np.ndarray, theta: np.ndarray, noise_std: float, seed) -> np.ndarray:
    """Draw y = X theta + eps with eps ~ N(0, noise_std^2 I)

    Args:
        X (np.ndarray): n x d design
        theta (np.ndarray): d-vector of coefficients
        noise_std (float): noise standard deviation
        seed (int | np.random.Generator): master seed or generator

    Returns:
        np.ndarray: the response
    """
    X = np.asarray(X, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if X.ndim != 2 or theta.shape != (X.shape[1],):
        raise ShapeError(f'cannot multiply X of shape {X.shape} with theta of shape {theta.shape}')
    if noise_std <= 0:
        raise ValueError(f'noise_std must be positive, got {noise_std}')
    rng = as_generator(seed, Stream.RESPONSE)
    return X @ theta + noise_std * rng.standard_normal(X.shape[0])


def simulate_instance(model: LinearModel, seed: int) -> Tuple[np.ndarray, RegressionInstance]:
    """Draw (theta, X, y) from a generative setting

    Returns:
        tuple: the true theta and the observed RegressionInstance
    """
    theta = sample_prior(model.prior, model.d, make_rng(seed, Stream.PRIOR))
    X = generate_design(model.design, model.n, model.d, seed)
    y = generate_response(X, theta, model.noise_std, make_rng(seed, Stream.RESPONSE))
    return theta, RegressionInstance(X=X, y=y, noise_std=model.noise_std)
