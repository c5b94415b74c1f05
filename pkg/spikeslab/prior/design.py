import math
from typing import Annotated, Callable, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer
from scipy import linalg, signal

from spikeslab.utils import Stream, make_rng

__all__ = ['IidGaussian', 'CorrelatedGaussian', 'IidGeneric', 'DesignSpec', 'generate_design']


class IidGaussian(BaseModel):
    """Entries i.i.d. N(0, variance)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal['iid_gaussian'] = 'iid_gaussian'
    variance: float = Field(1.0, gt=0)

    def draw_row(self, rng: np.random.Generator, d: int) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(self.variance), d)


class CorrelatedGaussian(BaseModel):
    """Rows N(0, Sigma) with the AR(1) Toeplitz covariance Sigma_ij = rho^|i-j|."""
    model_config = ConfigDict(frozen=True)

    kind: Literal['correlated_gaussian'] = 'correlated_gaussian'
    rho: float = Field(0.0, ge=0, lt=1)

    def covariance(self, d: int) -> np.ndarray:
        return linalg.toeplitz(self.rho ** np.arange(d))

    def draw_row(self, rng: np.random.Generator, d: int) -> np.ndarray:
        # Bidiagonal Cholesky factor: x_1 = z_1, x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j
        z = rng.standard_normal(d)
        scale = math.sqrt(1.0 - self.rho**2)
        z[0] /= scale
        return signal.lfilter([scale], [1.0, -self.rho], z)


def _rademacher(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size)


def _uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size)


_STANDARDIZED = {'rademacher': _rademacher, 'uniform': _uniform}


class IidGeneric(BaseModel):
    """Entries i.i.d. from a zero-mean unit-variance law.

    Args:
        sampler (str | Callable): 'rademacher', 'uniform', or a callable
            (rng, size) -> array drawing standardized entries
        variance (float): entries are rescaled to this variance
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal['iid_generic'] = 'iid_generic'
    sampler: Union[Literal['rademacher', 'uniform'], Callable] = 'rademacher'
    variance: float = Field(1.0, gt=0)

    def draw_row(self, rng: np.random.Generator, d: int) -> np.ndarray:
        draw = _STANDARDIZED[self.sampler] if isinstance(self.sampler, str) else self.sampler
        return math.sqrt(self.variance) * np.asarray(draw(rng, d), dtype=float)

    @field_serializer('sampler')
    def _sampler_name(self, sampler):
        return sampler if isinstance(sampler, str) else getattr(sampler, '__qualname__', repr(sampler))


DesignSpec = Annotated[Union[IidGaussian, CorrelatedGaussian, IidGeneric], Field(discriminator='kind')]


def generate_design(spec: DesignSpec, n: int, d: int, seed: int) -> np.ndarray:
    """Draw an n x d design matrix with i.i.d. rows

    Every row has its own random stream derived from (seed, row index), so the
    matrix does not depend on the order rows are generated in.

    Args:
        spec (DesignSpec): row distribution
        n (int): number of rows
        d (int): number of columns
        seed (int): master seed

    Returns:
        np.ndarray: the design matrix
    """
    if n < 1 or d < 1:
        raise ValueError(f'design shape must be positive, got ({n}, {d})')
    return np.vstack([spec.draw_row(make_rng(seed, Stream.DESIGN, i), d) for i in range(n)])
