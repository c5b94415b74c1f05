from enum import Enum
from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

__all__ = ['RejectionPolicy', 'MalaMethod', 'HmcMethod', 'ChainConfig']


class RejectionPolicy(str, Enum):
    """What a chain does after a rejected proposal.

    STAY repeats the current state (Metropolis-Hastings). RETRY draws fresh
    proposals until one is accepted; this changes the transition kernel and
    carries no stationarity guarantee.
    """
    STAY = 'stay'
    RETRY = 'retry'


class MalaMethod(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['mala'] = 'mala'
    tau: float = Field(0.2, gt=0)


class HmcMethod(BaseModel):
    """Leapfrog HMC with mass matrix `mass` (identity when omitted)."""
    model_config = ConfigDict(frozen=True, extra='forbid')

    kind: Literal['hmc'] = 'hmc'
    epsilon: float = Field(0.4, gt=0)
    ell: int = Field(10, ge=1)
    mass: Optional[List[List[float]]] = None

    @field_validator('mass')
    @classmethod
    def _positive_definite(cls, mass):
        if mass is None:
            return mass
        matrix = np.asarray(mass, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError('mass must be a square matrix')
        if not np.allclose(matrix, matrix.T):
            raise ValueError('mass must be symmetric')
        try:
            np.linalg.cholesky(matrix)
        except np.linalg.LinAlgError:
            raise ValueError('mass must be positive definite')
        return mass

    def mass_matrix(self, dim: int) -> np.ndarray:
        if self.mass is None:
            return np.eye(dim)
        matrix = np.asarray(self.mass, dtype=float)
        if matrix.shape != (dim, dim):
            raise ValueError(f'mass has shape {matrix.shape}, expected ({dim}, {dim})')
        return matrix


class ChainConfig(BaseModel):
    """Settings of one auxiliary-field chain.

    Attributes:
        method: MALA or HMC parameters
        total_steps (int): chain length K for run_mala/run_hmc; the two-stage
            sampler derives it from burn_in, thinning and the sample count
        burn_in (int): B, steps discarded before the first kept state
        thinning (int): g, keep every g-th state after burn-in
        rejection_policy (RejectionPolicy): stay (default) or retry
        max_retries (int): proposals allowed per step under the retry policy
        seed (int): master seed of the chain
        init_smoothness (float): L, the chain starts at N(mode, I/L)
        learning_rate (float): step of the gradient-descent mode finder
        max_iters (int): iteration cap of the mode finder
        keep_phis (bool): retain the kept auxiliary states in the SampleSet
        progress (bool): show a progress bar
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    method: Annotated[Union[MalaMethod, HmcMethod], Field(discriminator='kind')] = MalaMethod()
    total_steps: Optional[int] = Field(None, ge=1)
    burn_in: int = Field(10_000, ge=0)
    thinning: int = Field(1, ge=1)
    rejection_policy: RejectionPolicy = RejectionPolicy.STAY
    max_retries: int = Field(10_000, ge=1)
    seed: int = 0
    init_smoothness: float = Field(10.0, gt=0)
    learning_rate: float = Field(0.01, gt=0)
    max_iters: int = Field(100_000, ge=1)
    keep_phis: bool = False
    progress: bool = False
