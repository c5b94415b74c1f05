import math
from typing import Tuple, Union

import numpy as np

__all__ = ['bai_yin_limits', 'mp_edges', 'mp_density']


def bai_yin_limits(delta: float, sigma0: float) -> Tuple[float, float]:
    """Limits of the extreme eigenvalues of X^T X / sigma_d^2 for i.i.d. unit-variance designs.

    With n/d -> delta and sigma_d = sqrt(d) sigma0 the largest eigenvalue
    tends to delta (1 + 1/sqrt(delta))^2 / sigma0^2. The smallest tends to
    delta (1 - 1/sqrt(delta))^2 / sigma0^2 when delta >= 1 and to 0 otherwise.

    Returns:
        tuple: (lambda_min, lambda_max)
    """
    if delta <= 0 or sigma0 <= 0:
        raise ValueError(f'delta and sigma0 must be positive, got {delta}, {sigma0}')
    root = 1.0 / math.sqrt(delta)
    lambda_max = delta * (1.0 + root) ** 2 / sigma0**2
    lambda_min = delta * (1.0 - root) ** 2 / sigma0**2 if delta >= 1 else 0.0
    return lambda_min, lambda_max


def mp_edges(delta: float) -> Tuple[float, float]:
    root = 1.0 / math.sqrt(delta)
    return (1.0 - root) ** 2, (1.0 + root) ** 2


def mp_density(x: Union[float, np.ndarray], delta: float):
    """Marchenko-Pastur density of the spectrum of X^T X / n, d/n -> 1/delta.

    Only the absolutely continuous part is returned; for delta < 1 the law
    also has an atom of mass 1 - delta at zero.
    """
    a, b = mp_edges(delta)
    x = np.asarray(x, dtype=float)
    inside = (x > a) & (x < b) & (x > 0)
    safe = np.where(inside, x, 1.0)
    out = np.where(inside, delta / (2 * math.pi * safe) * np.sqrt(np.abs((b - safe) * (safe - a))), 0.0)
    return float(out) if out.ndim == 0 else out
