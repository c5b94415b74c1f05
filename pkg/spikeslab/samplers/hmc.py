from spikeslab.potential import Target
from .config import ChainConfig, HmcMethod
from .kernels import ChainResult, leapfrog, simulate_chain

__all__ = ['run_hmc', 'leapfrog']


def run_hmc(target: Target, config: ChainConfig) -> ChainResult:
    """Run a Hamiltonian Monte Carlo chain of config.total_steps steps

    Each step draws rho ~ N(0, Omega), integrates ell leapfrog steps of size
    epsilon and accepts with log-probability
    min{0, H(phi) - H(phi') + rho^T Omega^{-1} rho / 2 - rho'^T Omega^{-1} rho' / 2}.

    Args:
        target (Target): the energy H
        config (ChainConfig): chain settings with an HMC method

    Returns:
        ChainResult: all K states and the acceptance rate over every proposal
    """
    if not isinstance(config.method, HmcMethod):
        raise ValueError(f'run_hmc needs an HMC method, got {config.method.kind}')
    return simulate_chain(target, config)
