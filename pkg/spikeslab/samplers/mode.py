from typing import NamedTuple

import numpy as np

from spikeslab.potential import Target
from spikeslab.utils import DivergenceError, get_logger

__all__ = ['ModeResult', 'find_mode']

logger = get_logger(__name__)

_GRAD_TOL = 1e-8
_UPHILL_LIMIT = 10


class ModeResult(NamedTuple):
    phi: np.ndarray
    grad_norm: float
    iterations: int
    converged: bool


def find_mode(target: Target, learning_rate: float = 0.01, max_iters: int = 100_000,
              tol: float = _GRAD_TOL) -> ModeResult:
    """Fixed-step gradient descent on H from phi = 0

    Stops once the sup-norm of the gradient drops below tol or after
    max_iters steps.

    Args:
        target (Target): the energy H
        learning_rate (float): step size
        max_iters (int): iteration cap
        tol (float): gradient tolerance

    Returns:
        ModeResult: last iterate, its gradient sup-norm, iterations used and
        whether the tolerance was met
    """
    phi = np.zeros(target.dim)
    H, grad = target.energy_and_grad(phi)
    uphill = 0
    for it in range(max_iters):
        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if grad_norm < tol:
            return ModeResult(phi, grad_norm, it, True)
        phi = phi - learning_rate * grad
        H_new, grad = target.energy_and_grad(phi)
        if not np.isfinite(H_new) or not np.all(np.isfinite(grad)):
            raise DivergenceError(f'non-finite energy after {it + 1} iterations', it + 1)
        uphill = uphill + 1 if H_new > H else 0
        if uphill >= _UPHILL_LIMIT:
            raise DivergenceError(
                f'H increased for {_UPHILL_LIMIT} consecutive steps (learning rate {learning_rate})',
                it + 1)
        H = H_new

    grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
    converged = grad_norm < tol
    if not converged:
        logger.warning(f'Mode finder stopped after {max_iters} iterations with |grad| = {grad_norm:.3g}')
    return ModeResult(phi, grad_norm, max_iters, converged)
