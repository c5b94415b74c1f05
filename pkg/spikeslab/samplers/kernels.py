import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import linalg
from tqdm import tqdm

from spikeslab.potential import Target
from spikeslab.utils import ChainError, ConvergenceError, Stream, get_logger, is_quiet, make_rng
from .config import ChainConfig, HmcMethod, MalaMethod, RejectionPolicy
from .mode import ModeResult, find_mode

__all__ = ['ChainKernel', 'MalaKernel', 'HmcKernel', 'ChainResult', 'leapfrog',
           'build_kernel', 'initial_state', 'simulate_chain']

logger = get_logger(__name__)


def _check_finite(H: float, grad: np.ndarray, step: int):
    if not np.isfinite(H) or not np.all(np.isfinite(grad)):
        raise ChainError(f'non-finite energy or gradient at chain state {step}', step)


class ChainKernel:
    """Metropolis-Hastings kernel over the auxiliary field.

    Subclasses implement `_transition`, which draws one proposal and
    returns it with its energy, gradient and acceptance decision.

    Args:
        target (Target): the energy H
        policy (RejectionPolicy): stay on the current state or retry on rejection
        max_retries (int): proposals allowed per step under the retry policy

    Attributes:
        phi (np.ndarray): current state
        step_index (int): number of completed steps
        proposals (int): every proposal drawn so far
        accepted (int): accepted proposals

    Methods:
        reset(phi, rng): start the chain at phi
        step(): advance one step and return the new state
    """

    def __init__(self, target: Target, policy: RejectionPolicy = RejectionPolicy.STAY,
                 max_retries: int = 10_000):
        self.target = target
        self.policy = RejectionPolicy(policy)
        self.max_retries = max_retries
        self.rng = None
        self.phi = None
        self.H = None
        self.grad = None
        self.step_index = 0
        self.proposals = 0
        self.accepted = 0

    def reset(self, phi: np.ndarray, rng: np.random.Generator):
        """Place the chain at phi and clear the acceptance counters."""
        self.rng = rng
        self.phi = np.array(phi, dtype=float)
        self.H, self.grad = self.target.energy_and_grad(self.phi)
        _check_finite(self.H, self.grad, 0)
        self.step_index = 0
        self.proposals = 0
        self.accepted = 0
        return self.phi

    def _transition(self) -> Tuple[np.ndarray, float, np.ndarray, bool]:
        raise NotImplementedError

    def step(self) -> np.ndarray:
        """Advance the chain by one step.

        Returns:
            np.ndarray: the state after the step
        """
        self.step_index += 1
        attempts = 1 if self.policy is RejectionPolicy.STAY else self.max_retries
        for _ in range(attempts):
            phi, H, grad, accepted = self._transition()
            self.proposals += 1
            if accepted:
                self.accepted += 1
                self.phi, self.H, self.grad = phi, H, grad
                return self.phi
        if self.policy is RejectionPolicy.RETRY:
            raise ConvergenceError(
                f'no proposal accepted after {self.max_retries} retries at step {self.step_index}')
        return self.phi

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 0.0


class MalaKernel(ChainKernel):
    """Langevin proposal phi' = phi - tau grad H(phi) + sqrt(2 tau) xi with MH correction."""

    def __init__(self, target: Target, tau: float, **kwargs):
        super().__init__(target, **kwargs)
        self.tau = tau

    def _log_q(self, to: np.ndarray, frm: np.ndarray, grad_frm: np.ndarray) -> float:
        diff = to - frm + self.tau * grad_frm
        return -float(diff @ diff) / (4.0 * self.tau)

    def _transition(self):
        xi = self.rng.standard_normal(self.phi.shape[0])
        proposal = self.phi - self.tau * self.grad + math.sqrt(2.0 * self.tau) * xi
        H, grad = self.target.energy_and_grad(proposal)
        _check_finite(H, grad, self.step_index)
        log_alpha = (self.H - H + self._log_q(self.phi, proposal, grad)
                     - self._log_q(proposal, self.phi, self.grad))
        accepted = math.log(self.rng.random()) < log_alpha
        return proposal, H, grad, accepted


def leapfrog(target: Target, phi: np.ndarray, rho: np.ndarray, epsilon: float, ell: int,
             inv_mass: Optional[Callable] = None, grad: Optional[np.ndarray] = None):
    """Run ell leapfrog steps of size epsilon

    Args:
        target (Target): the potential energy H
        phi (np.ndarray): initial position
        rho (np.ndarray): initial momentum
        epsilon (float): step size
        ell (int): number of steps
        inv_mass (callable, optional): v -> Omega^{-1} v, identity when omitted
        grad (np.ndarray, optional): gradient of H at phi, if already known

    Returns:
        tuple: (phi, rho, H, grad) at the end of the trajectory
    """
    inv_mass = inv_mass or (lambda v: v)
    phi = np.array(phi, dtype=float)
    rho = np.array(rho, dtype=float)
    if grad is None:
        _, grad = target.energy_and_grad(phi)
    H = None
    for _ in range(ell):
        rho = rho - 0.5 * epsilon * grad
        phi = phi + epsilon * inv_mass(rho)
        H, grad = target.energy_and_grad(phi)
        rho = rho - 0.5 * epsilon * grad
    if H is None:
        H, grad = target.energy_and_grad(phi)
    return phi, rho, H, grad


class HmcKernel(ChainKernel):
    """Hamiltonian Monte Carlo with momentum rho ~ N(0, mass)."""

    def __init__(self, target: Target, epsilon: float, ell: int, mass: np.ndarray, **kwargs):
        super().__init__(target, **kwargs)
        self.epsilon = epsilon
        self.ell = ell
        self._chol = linalg.cholesky(mass, lower=True)
        self._cho = (self._chol, True)

    def _inv_mass(self, v: np.ndarray) -> np.ndarray:
        return linalg.cho_solve(self._cho, v)

    def _kinetic(self, rho: np.ndarray) -> float:
        return 0.5 * float(rho @ self._inv_mass(rho))

    def _transition(self):
        rho = self._chol @ self.rng.standard_normal(self.phi.shape[0])
        proposal, rho_new, H, grad = leapfrog(self.target, self.phi, rho, self.epsilon, self.ell,
                                              self._inv_mass, self.grad)
        _check_finite(H, grad, self.step_index)
        log_alpha = min(0.0, -H + self.H - self._kinetic(rho_new) + self._kinetic(rho))
        accepted = math.log(self.rng.random()) < log_alpha
        return proposal, H, grad, accepted


def build_kernel(target: Target, config: ChainConfig) -> ChainKernel:
    policy = dict(policy=config.rejection_policy, max_retries=config.max_retries)
    method = config.method
    if isinstance(method, MalaMethod):
        return MalaKernel(target, method.tau, **policy)
    if isinstance(method, HmcMethod):
        return HmcKernel(target, method.epsilon, method.ell, method.mass_matrix(target.dim), **policy)
    raise TypeError(f'unsupported method {type(method).__name__}')


def initial_state(target: Target, config: ChainConfig,
                  rng: np.random.Generator) -> Tuple[np.ndarray, ModeResult]:
    """Draw the first state from N(mode, I / L)."""
    mode = find_mode(target, config.learning_rate, config.max_iters)
    phi0 = mode.phi + rng.standard_normal(target.dim) / math.sqrt(config.init_smoothness)
    return phi0, mode


@dataclass(frozen=True)
class ChainResult:
    """States after each of the K steps; the initial state is not included."""
    states: np.ndarray
    acceptance_rate: float
    proposals: int
    mode: ModeResult
    config: ChainConfig


def simulate_chain(target: Target, config: ChainConfig) -> ChainResult:
    if config.total_steps is None:
        raise ValueError('total_steps must be set to run a chain')
    rng = make_rng(config.seed, Stream.CHAIN)
    phi0, mode = initial_state(target, config, rng)
    kernel = build_kernel(target, config)
    kernel.reset(phi0, rng)
    states = np.empty((config.total_steps, target.dim))
    bar = tqdm(range(config.total_steps), desc=config.method.kind,
               disable=is_quiet() or not config.progress)
    for k in bar:
        states[k] = kernel.step()
    logger.debug(f'{config.method.kind} chain: {config.total_steps} steps, '
                 f'acceptance {kernel.acceptance_rate:.3f}')
    return ChainResult(states, kernel.acceptance_rate, kernel.proposals, mode, config)
