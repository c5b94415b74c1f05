from spikeslab.potential import Target
from .config import ChainConfig, MalaMethod
from .kernels import ChainResult, simulate_chain

__all__ = ['run_mala']


def run_mala(target: Target, config: ChainConfig) -> ChainResult:
    """Run a Metropolis-adjusted Langevin chain of config.total_steps steps

    The chain starts from N(mode, I/L) with the mode found by gradient
    descent. Proposals are phi' = phi - tau grad H(phi) + sqrt(2 tau) xi and
    are accepted with probability
    min{1, exp(H(phi) - H(phi')) q(phi | phi') / q(phi' | phi)},
    q(x' | x) being proportional to exp(-|x' - x + tau grad H(x)|^2 / (4 tau)).

    Args:
        target (Target): the energy H, e.g. FieldTarget(decomp, prior)
        config (ChainConfig): chain settings with a MALA method

    Returns:
        ChainResult: all K states and the acceptance rate over every proposal
    """
    if not isinstance(config.method, MalaMethod):
        raise ValueError(f'run_mala needs a MALA method, got {config.method.kind}')
    return simulate_chain(target, config)
