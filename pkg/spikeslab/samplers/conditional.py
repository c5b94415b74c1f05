import math

import numpy as np
from scipy import special

from spikeslab.potential import Decomposition, log_half_gaussian_integral, potential_terms, tilted_window
from spikeslab.prior import GaussianSlab, GenericSlab, LaplaceSlab, SpikeSlabPrior, tabulated_inverse_cdf
from spikeslab.utils import QuadratureError, Stream, as_generator

__all__ = ['sample_tilted_slab', 'sample_theta_given_phi']

_TABLE_POINTS = 2049


def _positive_truncated_normal(mean: np.ndarray, s: float, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw from N(mean, s^2) truncated to (0, inf), in log space."""
    t = mean / s
    # -Z given Z > -t is Phi^{-1}(v Phi(t)), v = 1 - u in (0, 1]
    w = special.ndtri_exp(np.log1p(-u) + special.log_ndtr(t))
    return np.maximum(mean - s * w, 0.0)


def _laplace_draw(slab: LaplaceSlab, gamma: float, x: np.ndarray, rng: np.random.Generator):
    lam = slab.rate
    s = 1.0 / math.sqrt(gamma)
    log_pos = log_half_gaussian_integral(x - lam, gamma)
    log_neg = log_half_gaussian_integral(-x - lam, gamma)
    positive = rng.random(x.shape) < special.expit(log_pos - log_neg)
    u = rng.random(x.shape)
    pos = _positive_truncated_normal((x - lam) / gamma, s, u)
    neg = -_positive_truncated_normal(-(x + lam) / gamma, s, u)
    return np.where(positive, pos, neg)


def _generic_draw(slab: GenericSlab, gamma: float, x: np.ndarray, rng: np.random.Generator):
    u = rng.random(x.shape)
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        lo, hi = tilted_window(gamma, float(xi))
        grid = np.linspace(lo, hi, _TABLE_POINTS)
        log_density = xi * grid - 0.5 * gamma * grid**2 + slab.log_pdf(grid)
        if not np.all(np.isfinite(log_density)):
            raise QuadratureError(f'non-finite tilted density on [{lo}, {hi}]')
        out[i] = tabulated_inverse_cdf(log_density, grid, u[i])
    return out


def sample_tilted_slab(slab, gamma: float, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw from the law proportional to exp(x t - gamma t^2 / 2) mu(dt), one draw per entry of x."""
    x = np.asarray(x, dtype=float)
    if isinstance(slab, GaussianSlab):
        a = gamma + 1.0 / slab.variance
        return x / a + rng.standard_normal(x.shape) / math.sqrt(a)
    if isinstance(slab, LaplaceSlab):
        return _laplace_draw(slab, gamma, x, rng)
    if isinstance(slab, GenericSlab):
        return _generic_draw(slab, gamma, x, rng)
    raise TypeError(f'unsupported slab {type(slab).__name__}')


def sample_theta_given_phi(decomp: Decomposition, prior: SpikeSlabPrior, phi: np.ndarray,
                           seed) -> np.ndarray:
    """Draw theta from the product conditional given the auxiliary field

    With x = h + phi, each coordinate is 0 with probability 1 - p(x) and
    otherwise a draw from the Gaussian-tilted slab at x_i.

    Args:
        decomp (Decomposition): the decomposition
        prior (SpikeSlabPrior): the prior
        phi (np.ndarray): auxiliary field
        seed (int | np.random.Generator): seed or generator

    Returns:
        np.ndarray: theta with exact zeros on the spike
    """
    rng = as_generator(seed, Stream.THETA)
    x = decomp.h + np.asarray(phi, dtype=float)
    p = potential_terms(prior, decomp.gamma, x).p
    on_slab = rng.random(x.shape) < p
    theta = np.zeros_like(x)
    if np.any(on_slab):
        theta[on_slab] = sample_tilted_slab(prior.slab, decomp.gamma, x[on_slab], rng)
    return theta
