import math
from typing import NamedTuple, Union

import numpy as np
from scipy import optimize, special

from spikeslab.prior import SpikeSlabPrior
from spikeslab.utils import ConvergenceError, get_logger
from .transform import slab_transform

__all__ = ['PotentialTerms', 'InfResult', 'potential_terms', 'inf_v_second']

logger = get_logger(__name__)

ArrayLike = Union[float, np.ndarray]

# Tail search for inf V''
_GRID_POINTS = 512
_GRID_FLOOR = 1e-3
_TAIL_RTOL = 1e-3
_MAX_DOUBLINGS = 60
_ARGMIN_XTOL = 1e-6


class PotentialTerms(NamedTuple):
    """V, V', V'' and the slab responsibility p at a point."""
    V: ArrayLike
    V_prime: ArrayLike
    V_second: ArrayLike
    p: ArrayLike


class InfResult(NamedTuple):
    inf_value: float
    argmin_x: float


def _terms(prior: SpikeSlabPrior, gamma: float, x):
    tr = slab_transform(prior.slab, gamma, x)
    log_mix = np.logaddexp(prior.log_1mq, prior.log_q + tr.log_g)
    p = special.expit(tr.log_g + special.logit(prior.q))
    V = -log_mix
    V_prime = -p * tr.mean
    bump = p * (1.0 - p) * np.square(tr.mean)
    V_second = -p * tr.variance - bump
    return PotentialTerms(V, V_prime, V_second, p), bump


def potential_terms(prior: SpikeSlabPrior, gamma: float, x: ArrayLike) -> PotentialTerms:
    """Evaluate V = -log((1 - q) + q g(x)) with two derivatives.

    The mixture is combined in log space, g growing like exp(x^2 / 2 gamma).
    With p = q g / ((1 - q) + q g) the derivatives are

        V'  = -p g'/g
        V'' = -p (g''/g - (g'/g)^2) - p (1 - p) (g'/g)^2

    Args:
        prior (SpikeSlabPrior): the spike-and-slab prior
        gamma (float): decomposition shift
        x (float | np.ndarray): query point(s)

    Returns:
        PotentialTerms: (V, V_prime, V_second, p), shaped like x
    """
    terms, _ = _terms(prior, gamma, x)
    if np.ndim(x) == 0:
        return PotentialTerms(*(float(v) for v in terms))
    return terms


def _v_second(prior, gamma, x):
    return _terms(prior, gamma, x)[0].V_second


def inf_v_second(prior: SpikeSlabPrior, gamma: float) -> InfResult:
    """Global infimum of V'' over the real line.

    V'' is even for symmetric slabs, so only x >= 0 is searched: a log-spaced
    grid on [0, x_max] followed by golden-section refinement around the best
    grid point. V'' tends to minus the limiting tilted variance rather than
    to zero, so x_max is doubled until the mixture term p (1 - p) (g'/g)^2
    has decayed at x_max and V'' is flat over the last doubling, both
    relative to the current best value.

    Args:
        prior (SpikeSlabPrior): the prior
        gamma (float): decomposition shift

    Returns:
        InfResult: (inf_value <= 0, argmin_x >= 0)
    """
    if not gamma > 0:
        raise ValueError(f'gamma must be positive, got {gamma}')
    x_max = 4.0 * math.sqrt(max(gamma, 1.0))

    for _ in range(_MAX_DOUBLINGS):
        grid = np.concatenate([[0.0], np.geomspace(_GRID_FLOOR, x_max, _GRID_POINTS)])
        values = _v_second(prior, gamma, grid)
        best = float(np.min(values))
        terms, bumps = _terms(prior, gamma, np.array([x_max, 2.0 * x_max]))
        tail, far = terms.V_second
        scale = _TAIL_RTOL * abs(best)
        if bumps[0] <= scale and abs(far - tail) <= scale:
            break
        x_max *= 2.0
    else:
        raise ConvergenceError(
            f'inf V\'\' tail search did not settle after {_MAX_DOUBLINGS} doublings (gamma={gamma})')

    i = int(np.argmin(values))
    x_best, v_best = float(grid[i]), best
    if 0 < i < len(grid) - 1:
        f = lambda t: float(_v_second(prior, gamma, abs(t)))
        bracket = (grid[i - 1], grid[i], grid[i + 1])
        try:
            res = optimize.minimize_scalar(f, bracket=bracket, method='golden',
                                           tol=_ARGMIN_XTOL / max(grid[i], 1.0))
        except ValueError:
            # Ties on the grid leave no strict bracket
            res = optimize.minimize_scalar(f, bounds=(grid[i - 1], grid[i + 1]), method='bounded',
                                           options={'xatol': _ARGMIN_XTOL})
        if res.fun < v_best:
            x_best, v_best = abs(float(res.x)), float(res.fun)

    logger.debug(f'inf V\'\'(gamma={gamma:.6g}) = {v_best:.6g} at x = {x_best:.6g}')
    return InfResult(min(v_best, 0.0), x_best)
