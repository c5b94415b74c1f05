import math

import numpy as np
from scipy import integrate

from spikeslab.potential import Decomposition
from spikeslab.prior import RegressionInstance, SpikeSlabPrior
from spikeslab.utils import PreconditionError, QuadratureError

__all__ = ['decomposition_consistency_check']

_PHI_SPAN = 10.0
_THETA_SPAN = 8.0


class _PhiRule:
    """Gauss-Legendre rule on one phi window shared by every theta.

    phi | theta is N(A theta, A), so the window spans A theta +- 10 sqrt(A)
    for all theta in [lo, hi] and for theta = 0.
    """

    def __init__(self, A: float, lo: float, hi: float, n_nodes: int):
        a = min(A * lo, 0.0) - _PHI_SPAN * math.sqrt(A)
        b = max(A * hi, 0.0) + _PHI_SPAN * math.sqrt(A)
        nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
        self.phi = 0.5 * (b - a) * nodes + 0.5 * (b + a)
        self.weights = 0.5 * (b - a) * weights
        self.A = A

    def log_integral(self, theta: np.ndarray) -> np.ndarray:
        """log of int exp(phi theta - phi^2 / (2A)) dphi / sqrt(2 pi A)."""
        theta = np.atleast_1d(theta)
        log_f = self.phi[None, :] * theta[:, None] - self.phi[None, :] ** 2 / (2 * self.A)
        peak = np.max(log_f, axis=1)
        total = np.exp(log_f - peak[:, None]) @ self.weights
        return peak + np.log(total) - 0.5 * math.log(2 * math.pi * self.A)


def _log_mass(log_cont, log_atom: float, lo: float, hi: float, peaks) -> float:
    """log of atom + integral of the continuous part over [lo, hi], split at 0."""
    shift = max(log_atom, float(np.max(log_cont(np.linspace(lo, hi, 2001)))))
    f = lambda t: math.exp(float(log_cont(np.array([t]))[0]) - shift)
    mass = math.exp(log_atom - shift)
    for a, b in ((lo, min(0.0, hi)), (max(0.0, lo), hi)):
        if a < b:
            inner = [p for p in peaks if a < p < b] or None
            out = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-11, limit=200, points=inner,
                                 full_output=1)
            if len(out) == 4:
                raise QuadratureError(f'theta integral did not converge: {out[3]}')
            mass += out[0]
    return shift + math.log(mass)


def decomposition_consistency_check(decomp: Decomposition, prior: SpikeSlabPrior,
                                    instance: RegressionInstance, n_nodes: int = 400,
                                    n_theta: int = 200) -> float:
    """Check numerically that the phi-marginalized joint law reproduces the posterior, d = 1

    The joint density exp((h + phi) theta - gamma theta^2 / 2 - phi^2 / (2A)) pi_0(dtheta)
    is integrated over phi by Gauss-Legendre quadrature and compared with the
    posterior exp(h theta - lambda theta^2 / 2) pi_0(dtheta), lambda = |x|^2 / sigma^2.
    Both sides are normalized to unit mass (atom plus continuous part) on a
    common theta window of eight posterior scales around the ridge center.

    Args:
        decomp (Decomposition): decomposition with gamma > lambda
        prior (SpikeSlabPrior): the prior
        instance (RegressionInstance): data with a single column
        n_nodes (int): Gauss-Legendre nodes over phi
        n_theta (int): theta grid points for the comparison

    Returns:
        float: maximum absolute discrepancy over the theta grid and the atom
    """
    if instance.d != 1 or decomp.d != 1:
        raise PreconditionError('the consistency check is defined for d = 1')
    if not decomp.gamma > decomp.lambda_max:
        raise PreconditionError(
            f'gamma={decomp.gamma:.6g} must exceed lambda_max={decomp.lambda_max:.6g}')
    gamma, h, lam = decomp.gamma, float(decomp.h[0]), decomp.lambda_max
    A = float(decomp.A[0, 0])

    precision = lam + 1.0 / prior.slab.second_moment()
    center, scale = h / precision, 1.0 / math.sqrt(precision)
    lo, hi = center - _THETA_SPAN * scale, center + _THETA_SPAN * scale
    rule = _PhiRule(A, lo, hi, n_nodes)
    log_q, log_1mq = prior.log_q, prior.log_1mq

    def log_joint(theta):
        return (log_q + prior.slab.log_pdf(theta) + h * theta - 0.5 * gamma * theta**2
                + rule.log_integral(theta))

    def log_target(theta):
        return log_q + prior.slab.log_pdf(theta) + h * theta - 0.5 * lam * theta**2

    log_joint_atom = log_1mq + float(rule.log_integral(np.zeros(1))[0])
    peaks = (center - scale, center, center + scale)
    log_z_joint = _log_mass(log_joint, log_joint_atom, lo, hi, peaks)
    log_z_target = _log_mass(log_target, log_1mq, lo, hi, peaks)

    theta = np.linspace(lo, hi, n_theta)
    joint = np.exp(log_joint(theta) - log_z_joint)
    target = np.exp(log_target(theta) - log_z_target)
    atom_error = abs(math.exp(log_joint_atom - log_z_joint) - math.exp(log_1mq - log_z_target))
    return float(max(np.max(np.abs(joint - target)), atom_error))
