import math

import numpy as np
from scipy import integrate

from spikeslab.prior import RegressionInstance, SpikeSlabPrior
from spikeslab.utils import PreconditionError, QuadratureError
from .exact import pattern_masks

__all__ = ['quadrature_pattern_weights']

_TOL = 1e-11
# Integration box half-width in conditional standard deviations
_SPAN = 25.0


def _box(instance: RegressionInstance, prior: SpikeSlabPrior):
    """Per-coordinate integration limits around a ridge-type posterior center."""
    sigma2 = instance.noise_std**2
    slab_var = prior.slab.second_moment()
    precision = instance.X.T @ instance.X / sigma2 + np.eye(instance.d) / slab_var
    center = np.linalg.solve(precision, instance.X.T @ instance.y / sigma2)
    scale = 1.0 / np.sqrt(np.diag(precision))
    return center - _SPAN * scale, center + _SPAN * scale


def _checked(result):
    value, err = result[0], result[1]
    if not np.isfinite(value) or err > max(_TOL, 1e-8 * abs(value)):
        raise QuadratureError(f'pattern integral {value} has error estimate {err}')
    return value


def quadrature_pattern_weights(instance: RegressionInstance, prior: SpikeSlabPrior) -> np.ndarray:
    """Posterior probability of each support pattern by direct quadrature, for d <= 2

    Works for any slab. Each pattern's mass is the prior weight times the
    integral of the likelihood against the slab densities on its support,
    split at zero in every coordinate so the Laplace kink sits on a breakpoint.

    Args:
        instance (RegressionInstance): observed data with d <= 2
        prior (SpikeSlabPrior): the prior

    Returns:
        np.ndarray: normalized weights indexed like pattern_masks(d)
    """
    d = instance.d
    if d > 2:
        raise PreconditionError(f'quadrature ground truth supports d <= 2, got d={d}')
    X, y, sigma2 = instance.X, instance.y, instance.noise_std**2
    # The full least-squares fit bounds every pattern's likelihood
    theta_ls = np.linalg.lstsq(X, y, rcond=None)[0]
    shift = -0.5 * float(np.sum((y - X @ theta_ls) ** 2)) / sigma2
    lo, hi = _box(instance, prior)
    log_pdf = prior.slab.log_pdf

    def log_lik(theta):
        r = y - X @ theta
        return -0.5 * float(r @ r) / sigma2 - shift

    masses = []
    for support in pattern_masks(d):
        size = int(support.sum())
        log_prior = size * prior.log_q + (d - size) * prior.log_1mq
        if size == 0:
            mass = math.exp(log_lik(np.zeros(d)))
        elif size == 1:
            i = int(np.nonzero(support)[0][0])

            def f(t):
                theta = np.zeros(d)
                theta[i] = t
                return math.exp(log_lik(theta) + float(log_pdf(t)))

            mass = sum(_checked(integrate.quad(f, a, b, epsabs=_TOL, epsrel=_TOL, limit=200))
                       for a, b in ((lo[i], min(0.0, hi[i])), (max(0.0, lo[i]), hi[i])) if a < b)
        else:
            def f(t1, t0):
                theta = np.array([t0, t1])
                return math.exp(log_lik(theta) + float(log_pdf(t0)) + float(log_pdf(t1)))

            mass = 0.0
            for a0, b0 in ((lo[0], min(0.0, hi[0])), (max(0.0, lo[0]), hi[0])):
                for a1, b1 in ((lo[1], min(0.0, hi[1])), (max(0.0, lo[1]), hi[1])):
                    if a0 < b0 and a1 < b1:
                        mass += _checked(integrate.dblquad(f, a0, b0, a1, b1, epsabs=_TOL, epsrel=1e-10))
        masses.append(math.exp(log_prior) * mass)

    masses = np.array(masses)
    return masses / masses.sum()
