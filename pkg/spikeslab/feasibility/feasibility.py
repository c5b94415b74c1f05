import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from spikeslab.potential import Decomposition, gram_spectrum, inf_v_second
from spikeslab.prior import SpikeSlabPrior
from spikeslab.utils import ConvergenceError, PreconditionError, get_logger
from .spectrum import bai_yin_limits

__all__ = [
    'FeasibilitySettings',
    'FeasibilityReport',
    'AsymptoticPoint',
    'search_gamma',
    'empirical_feasibility',
    'asymptotic_feasibility',
    'decomposition_margin',
    'tail_lower_bound',
    'sufficient_condition',
    'fit_tail_constant',
]

logger = get_logger(__name__)


class FeasibilitySettings(BaseModel):
    """Grid used to search for a certifying gamma.

    The grid is log-spaced on [lambda_max (1 + lower_rel), cap_factor (lambda_max + 1)].
    Margins within boundary_tol of zero count as infeasible.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    grid_size: int = Field(200, ge=2)
    cap_factor: float = Field(100.0, gt=1)
    lower_rel: float = Field(1e-6, gt=0)
    boundary_tol: float = Field(1e-9, ge=0)


class FeasibilityReport(BaseModel):
    """Outcome of the gamma search.

    When feasible, margin = 1/(gamma_star - lambda_min) + inf_v_second is a
    lower bound on the smallest eigenvalue of the Hessian of H at gamma_star.
    When infeasible, gamma_star is absent and margin, inf_v_second and
    gamma_best describe the best grid point.
    """
    model_config = ConfigDict(frozen=True)

    feasible: bool
    gamma_star: Optional[float] = None
    gamma_best: float
    margin: float
    inf_v_second: float
    lambda_min: float
    lambda_max: float
    gammas_tested: int


class AsymptoticPoint(BaseModel):
    """Proportional regime n/d -> delta with sigma_d = sqrt(d) sigma0."""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0)
    sigma0: float = Field(..., gt=0)
    prior: SpikeSlabPrior


def _margin(gamma: float, lambda_min: float, inf_value: float) -> float:
    return 1.0 / (gamma - lambda_min) + inf_value


def search_gamma(lambda_min: float, lambda_max: float, prior: SpikeSlabPrior,
                 settings: Optional[FeasibilitySettings] = None) -> FeasibilityReport:
    """Scan the gamma grid and return the first gamma with a strictly positive margin

    Args:
        lambda_min (float): smallest eigenvalue (or its limit) of X^T X / sigma^2
        lambda_max (float): largest eigenvalue (or its limit)
        prior (SpikeSlabPrior): the prior
        settings (FeasibilitySettings, optional): grid settings

    Returns:
        FeasibilityReport: the verdict
    """
    settings = settings or FeasibilitySettings()
    lower = lambda_max * (1.0 + settings.lower_rel) if lambda_max > 0 else settings.lower_rel
    upper = settings.cap_factor * (lambda_max + 1.0)
    gammas = np.geomspace(lower, upper, settings.grid_size)

    best = None
    for i, gamma in enumerate(gammas):
        gamma = float(gamma)
        inf_value = inf_v_second(prior, gamma).inf_value
        margin = _margin(gamma, lambda_min, inf_value)
        if margin > settings.boundary_tol:
            return FeasibilityReport(
                feasible=True, gamma_star=gamma, gamma_best=gamma, margin=margin,
                inf_v_second=inf_value, lambda_min=lambda_min, lambda_max=lambda_max,
                gammas_tested=i + 1)
        if best is None or margin > best[1]:
            best = (gamma, margin, inf_value)

    gamma, margin, inf_value = best
    return FeasibilityReport(
        feasible=False, gamma_best=gamma, margin=margin, inf_v_second=inf_value,
        lambda_min=lambda_min, lambda_max=lambda_max, gammas_tested=len(gammas))


def empirical_feasibility(X: np.ndarray, noise_std: float, prior: SpikeSlabPrior,
                          settings: Optional[FeasibilitySettings] = None) -> FeasibilityReport:
    """Decide whether some gamma makes H strongly convex for this design

    The verdict depends on X only, never on y.

    Args:
        X (np.ndarray): n x d design
        noise_std (float): noise standard deviation
        prior (SpikeSlabPrior): the prior
        settings (FeasibilitySettings, optional): grid settings

    Returns:
        FeasibilityReport: the verdict
    """
    X = np.asarray(X, dtype=float)
    if not np.any(X):
        raise PreconditionError('feasibility needs a nonzero design matrix')
    try:
        lambda_min, lambda_max = gram_spectrum(X, noise_std)
    except linalg.LinAlgError as e:
        raise ConvergenceError(f'eigendecomposition failed: {e}') from e
    report = search_gamma(lambda_min, lambda_max, prior, settings)
    logger.debug(f'Empirical feasibility: {report.feasible} (margin {report.margin:.3g})')
    return report


def asymptotic_feasibility(pt: AsymptoticPoint,
                           settings: Optional[FeasibilitySettings] = None) -> FeasibilityReport:
    """Same search with the extreme eigenvalues replaced by their Bai-Yin limits"""
    lambda_min, lambda_max = bai_yin_limits(pt.delta, pt.sigma0)
    return search_gamma(lambda_min, lambda_max, pt.prior, settings)


def decomposition_margin(decomp: Decomposition, prior: SpikeSlabPrior) -> float:
    """Strong-convexity margin of H at the decomposition's own gamma."""
    return _margin(decomp.gamma, decomp.lambda_min, inf_v_second(prior, decomp.gamma).inf_value)


def tail_lower_bound(gamma: float, c0: float, k: int) -> float:
    """-c0 (1/gamma + 1/gamma^2) (1 + log(gamma + 1))^((2k - 1)/k), a lower bound on inf V''."""
    return -c0 * (1.0 / gamma + 1.0 / gamma**2) * (1.0 + math.log1p(gamma)) ** ((2 * k - 1) / k)


def sufficient_condition(gamma: float, lambda_min: float, c0: float, k: int) -> bool:
    """Convexity of H implied by the tail bound alone, without evaluating inf V''."""
    if gamma <= lambda_min:
        return False
    return 1.0 / (gamma - lambda_min) > -tail_lower_bound(gamma, c0, k)


def fit_tail_constant(prior: SpikeSlabPrior, gammas, k: int) -> float:
    """Smallest c0 making tail_lower_bound hold on the given gammas."""
    ratios = [inf_v_second(prior, float(g)).inf_value / tail_lower_bound(float(g), 1.0, k)
              for g in gammas]
    return float(max(ratios))
