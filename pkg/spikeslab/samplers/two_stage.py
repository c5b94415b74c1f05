from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from spikeslab.feasibility import decomposition_margin
from spikeslab.potential import Decomposition, FieldTarget
from spikeslab.prior import SpikeSlabPrior
from spikeslab.utils import (Stream, derive_seed, get_logger, is_quiet, make_rng, parallel_map,
                             write_csv, write_json)
from .config import ChainConfig
from .conditional import sample_theta_given_phi
from .kernels import build_kernel, initial_state

__all__ = ['SampleSet', 'two_stage_sample', 'run_chains']

logger = get_logger(__name__)


@dataclass(frozen=True)
class SampleSet:
    """Draws of theta from the two-stage sampler.

    Attributes:
        thetas (np.ndarray): N x d draws
        acceptance_rate (float): accepted / proposed over the whole chain, burn-in included
        proposals (int): number of proposals drawn
        config (ChainConfig): chain settings, total_steps filled in
        gamma (float): decomposition shift used
        mode_grad_norm (float, optional): gradient sup-norm at the mode the chain started from
        phis (np.ndarray, optional): the kept auxiliary states
    """
    thetas: np.ndarray
    acceptance_rate: float
    proposals: int
    config: ChainConfig
    gamma: float
    mode_grad_norm: Optional[float]
    phis: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def n_samples(self) -> int:
        return self.thetas.shape[0]

    def metadata(self) -> dict:
        return {
            'acceptance_rate': self.acceptance_rate,
            'proposals': self.proposals,
            'n_samples': self.n_samples,
            'dimension': self.thetas.shape[1],
            'gamma': self.gamma,
            'mode_grad_norm': self.mode_grad_norm,
            'seed': self.seed,
            'config': self.config.model_dump(mode='json'),
        }

    def to_csv(self, path, extra: Optional[dict] = None) -> Path:
        """Write one row per draw and a JSON metadata sidecar next to it.

        Args:
            path (str | Path): CSV path; the sidecar takes its stem
            extra (dict, optional): further keys for the sidecar, e.g. the run config

        Returns:
            Path: the sidecar path
        """
        path = Path(path)
        d = self.thetas.shape[1]
        write_csv(path, [f'theta_{i + 1}' for i in range(d)], self.thetas)
        sidecar = path.with_suffix('.json')
        write_json(sidecar, {**self.metadata(), **(extra or {})})
        return sidecar


def two_stage_sample(decomp: Decomposition, prior: SpikeSlabPrior, config: ChainConfig,
                     n_samples: int) -> SampleSet:
    """Sample theta by running a chain on the auxiliary field and drawing theta | phi

    The chain runs K = B + N g steps. After the B burn-in steps every g-th
    state is kept and paired with one conditional draw of theta. The output
    depends only on the inputs and config.seed.

    Args:
        decomp (Decomposition): the decomposition
        prior (SpikeSlabPrior): the prior
        config (ChainConfig): chain settings
        n_samples (int): number N of theta draws

    Returns:
        SampleSet: exactly N draws with chain metadata
    """
    if n_samples < 0:
        raise ValueError(f'n_samples must be nonnegative, got {n_samples}')
    d = decomp.d
    total_steps = config.burn_in + n_samples * config.thinning
    if config.total_steps is not None and config.total_steps != max(total_steps, 1):
        logger.warning(f'total_steps={config.total_steps} replaced by B + N g = {total_steps}')
    config = config.model_copy(update={'total_steps': max(total_steps, 1)})
    if n_samples == 0:
        return SampleSet(np.empty((0, d)), 0.0, 0, config, decomp.gamma, None,
                         np.empty((0, d)) if config.keep_phis else None)

    margin = decomposition_margin(decomp, prior)
    if margin <= 0:
        logger.warning(f'H is not certified strongly convex at gamma={decomp.gamma:.6g} '
                       f'(margin {margin:.3g}); sampling anyway')

    target = FieldTarget(decomp, prior)
    chain_rng = make_rng(config.seed, Stream.CHAIN)
    theta_rng = make_rng(config.seed, Stream.THETA)
    phi0, mode = initial_state(target, config, chain_rng)
    kernel = build_kernel(target, config)
    kernel.reset(phi0, chain_rng)

    thetas = np.empty((n_samples, d))
    phis = np.empty((n_samples, d)) if config.keep_phis else None
    kept = 0
    bar = tqdm(range(1, total_steps + 1), desc=f'two-stage {config.method.kind}',
               disable=is_quiet() or not config.progress)
    for k in bar:
        phi = kernel.step()
        if k > config.burn_in and (k - config.burn_in) % config.thinning == 0:
            thetas[kept] = sample_theta_given_phi(decomp, prior, phi, theta_rng)
            if phis is not None:
                phis[kept] = phi
            kept += 1

    logger.info(f'Two-stage {config.method.kind}: {n_samples} draws, '
                f'acceptance {kernel.acceptance_rate:.3f}')
    return SampleSet(thetas, kernel.acceptance_rate, kernel.proposals, config, decomp.gamma,
                     mode.grad_norm, phis)


def _run_one(args) -> SampleSet:
    decomp, prior, config, n_samples = args
    return two_stage_sample(decomp, prior, config, n_samples)


def run_chains(decomp: Decomposition, prior: SpikeSlabPrior, config: ChainConfig,
               n_samples: int, n_chains: int, workers: int = 1) -> List[SampleSet]:
    """Independent two-stage runs with seeds derived from config.seed and the chain index."""
    jobs = [(decomp, prior, config.model_copy(update={'seed': derive_seed(config.seed, Stream.CHAIN, i)}),
             n_samples) for i in range(n_chains)]
    return parallel_map(_run_one, jobs, workers)
