from dataclasses import dataclass, field
from typing import Optional, Protocol, Tuple

import numpy as np
from scipy import linalg

from spikeslab.prior import RegressionInstance, SpikeSlabPrior
from spikeslab.utils import PreconditionError, ShapeError, get_logger
from .potential import potential_terms

__all__ = [
    'DEFAULT_GAMMA_OFFSET',
    'Decomposition',
    'Target',
    'FieldTarget',
    'QuadraticTarget',
    'gram_spectrum',
    'decompose',
    'field_hamiltonian',
    'hessian_diagonal',
]

logger = get_logger(__name__)

DEFAULT_GAMMA_OFFSET = 0.1


def gram_spectrum(X: np.ndarray, noise_std: float) -> Tuple[float, float]:
    """Extreme eigenvalues of X^T X / noise_std^2 by dense symmetric eigendecomposition."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ShapeError(f'X must be a matrix, got shape {X.shape}')
    return _spectrum(X.T @ X / noise_std**2)


def _spectrum(gram: np.ndarray) -> Tuple[float, float]:
    eigvals = linalg.eigh(gram, eigvals_only=True)
    # Round-off can push the smallest eigenvalue of a PSD matrix below zero
    return float(max(eigvals[0], 0.0)), float(eigvals[-1])


@dataclass(frozen=True)
class Decomposition:
    """Shift gamma, tilt h = X^T y / sigma^2 and A = gamma I - X^T X / sigma^2.

    A is kept as its Cholesky factor; every product with the inverse of A
    goes through a triangular solve.
    """
    gamma: float
    h: np.ndarray
    A: np.ndarray
    lambda_min: float
    lambda_max: float
    _cho: tuple = field(repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.h.shape[0]

    def solve(self, v: np.ndarray) -> np.ndarray:
        """A^{-1} v."""
        return linalg.cho_solve(self._cho, v)

    @property
    def inverse_norm(self) -> float:
        """Operator norm of A^{-1}."""
        return 1.0 / (self.gamma - self.lambda_max)


def decompose(instance: RegressionInstance, gamma: Optional[float] = None,
              offset: float = DEFAULT_GAMMA_OFFSET) -> Decomposition:
    """Build the measure decomposition of the posterior of an instance

    Args:
        instance (RegressionInstance): observed data
        gamma (float, optional): shift; defaults to lambda_max + offset
        offset (float): added to lambda_max when gamma is not given

    Returns:
        Decomposition: the factored decomposition
    """
    X, sigma2 = instance.X, instance.noise_std**2
    gram = X.T @ X / sigma2
    lambda_min, lambda_max = _spectrum(gram)
    if gamma is None:
        gamma = lambda_max + offset
    if not gamma > lambda_max:
        raise PreconditionError(
            f'gamma={gamma:.6g} must exceed the largest eigenvalue {lambda_max:.6g} of X^T X / sigma^2')

    A = gamma * np.eye(instance.d) - gram
    try:
        cho = linalg.cho_factor(A, lower=True)
    except linalg.LinAlgError as e:
        raise PreconditionError(f'A is not numerically positive definite at gamma={gamma:.6g}') from e
    h = X.T @ instance.y / sigma2
    for array in (A, h):
        array.flags.writeable = False
    return Decomposition(gamma=float(gamma), h=h, A=A, lambda_min=lambda_min,
                         lambda_max=lambda_max, _cho=cho)


class Target(Protocol):
    """Log-concave target exp(-H) over the auxiliary field."""
    dim: int

    def energy_and_grad(self, phi: np.ndarray) -> Tuple[float, np.ndarray]:
        ...


class FieldTarget:
    """H(phi) = <phi, A^{-1} phi>/2 + sum_i V(h_i + phi_i) for a decomposition and prior."""

    def __init__(self, decomp: Decomposition, prior: SpikeSlabPrior):
        self.decomp = decomp
        self.prior = prior
        self.dim = decomp.d

    def energy_and_grad(self, phi: np.ndarray) -> Tuple[float, np.ndarray]:
        inv_phi = self.decomp.solve(phi)
        terms = potential_terms(self.prior, self.decomp.gamma, self.decomp.h + phi)
        H = 0.5 * float(phi @ inv_phi) + float(np.sum(terms.V))
        return H, inv_phi + terms.V_prime


class QuadraticTarget:
    """Standard Gaussian target H(phi) = |phi|^2 / 2, a known-answer hook for the samplers."""

    def __init__(self, dim: int):
        self.dim = dim

    def energy_and_grad(self, phi: np.ndarray) -> Tuple[float, np.ndarray]:
        return 0.5 * float(phi @ phi), np.array(phi, dtype=float)


def field_hamiltonian(decomp: Decomposition, prior: SpikeSlabPrior,
                      phi: np.ndarray) -> Tuple[float, np.ndarray]:
    """Evaluate H and its gradient A^{-1} phi + V'(h + phi)

    Args:
        decomp (Decomposition): decomposition of the posterior
        prior (SpikeSlabPrior): the prior
        phi (np.ndarray): auxiliary field, finite d-vector

    Returns:
        tuple: (H, grad_H)
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (decomp.d,):
        raise ShapeError(f'phi has shape {phi.shape}, expected ({decomp.d},)')
    return FieldTarget(decomp, prior).energy_and_grad(phi)


def hessian_diagonal(decomp: Decomposition, prior: SpikeSlabPrior, phi: np.ndarray) -> np.ndarray:
    """Diagonal of the Hessian of H at phi, diag(A^{-1}) + V''(h + phi).

    The smallest Hessian eigenvalue is at least 1/(gamma - lambda_min) + min_i V''(h_i + phi_i).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (decomp.d,):
        raise ShapeError(f'phi has shape {phi.shape}, expected ({decomp.d},)')
    inv_diag = np.diag(decomp.solve(np.eye(decomp.d)))
    return inv_diag + potential_terms(prior, decomp.gamma, decomp.h + phi).V_second
