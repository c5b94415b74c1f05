from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spikeslab.feasibility import FeasibilitySettings, empirical_feasibility
from spikeslab.potential import DEFAULT_GAMMA_OFFSET, decompose
from spikeslab.prior import CorrelatedGaussian, LinearModel, SlabFamily, SpikeSlabPrior, simulate_instance
from spikeslab.samplers import ChainConfig, two_stage_sample
from spikeslab.utils import (InfeasibleSettingError, SpikeSlabError, Stream, derive_seed, get_logger,
                             parallel_map, write_csv, write_json)
from .intervals import credible_intervals

__all__ = [
    'default_burn_in',
    'CoverageSetting',
    'RepetitionOutcome',
    'CoverageResult',
    'pilot_feasibility',
    'coverage_experiment',
    'thinning_sweep',
]

logger = get_logger(__name__)

BASE_BURN_IN = 10_000
CORRELATED_BURN_IN = 20_000


def default_burn_in(rho: float) -> int:
    """Burn-in for an AR(1) design: 10^4 steps, doubled for rho above 0.6."""
    return CORRELATED_BURN_IN if rho > 0.6 else BASE_BURN_IN


class CoverageSetting(BaseModel):
    """Full generative setting of a coverage experiment.

    Attributes:
        model (LinearModel): law of (theta, X, y)
        chain (ChainConfig): sampler settings; burn-in defaults to default_burn_in(rho)
        n_samples (int): theta draws per repetition
        level (float): credibility level of the intervals
        assumed_slab (SlabFamily, optional): slab used by the sampler instead of
            the true one, for misspecified-prior runs
        gamma_offset (float): gamma = lambda_max + gamma_offset per repetition
        force (bool): run even if the pilot feasibility check fails
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    model: LinearModel
    chain: ChainConfig = ChainConfig()
    n_samples: int = Field(2000, ge=1)
    level: float = Field(0.95, gt=0, lt=1)
    assumed_slab: Optional[SlabFamily] = None
    gamma_offset: float = Field(DEFAULT_GAMMA_OFFSET, gt=0)
    force: bool = False
    feasibility: FeasibilitySettings = FeasibilitySettings()

    @model_validator(mode='after')
    def _default_burn_in(self):
        if 'burn_in' not in self.chain.model_fields_set:
            design = self.model.design
            rho = design.rho if isinstance(design, CorrelatedGaussian) else 0.0
            chain = self.chain.model_copy(update={'burn_in': default_burn_in(rho)})
            object.__setattr__(self, 'chain', chain)
        return self

    @property
    def sampling_prior(self) -> SpikeSlabPrior:
        """Prior handed to the sampler; differs from the true prior when misspecified."""
        if self.assumed_slab is None:
            return self.model.prior
        return SpikeSlabPrior(q=self.model.prior.q, slab=self.assumed_slab)


@dataclass(frozen=True)
class RepetitionOutcome:
    index: int
    covered: Optional[np.ndarray]
    acceptance_rate: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class CoverageResult:
    """Containment indicators of all successful repetitions.

    Attributes:
        repetitions (int): repetitions requested
        indices (np.ndarray): indices of the successful repetitions
        indicators (np.ndarray): len(indices) x d booleans, true theta inside the interval
        aggregate_rate (float): mean of all indicators
        per_coordinate_rates (np.ndarray): mean over repetitions per coordinate
        failures (list): (repetition, message) of repetitions that raised
        acceptance_rates (np.ndarray): chain acceptance rate per successful repetition
        setting (dict): echo of the setting
    """
    repetitions: int
    indices: np.ndarray
    indicators: np.ndarray
    aggregate_rate: float
    per_coordinate_rates: np.ndarray
    failures: List[Tuple[int, str]]
    acceptance_rates: np.ndarray
    setting: Dict = field(repr=False)

    def summary(self) -> dict:
        return {
            'repetitions': self.repetitions,
            'successful': int(self.indices.size),
            'aggregate_rate': self.aggregate_rate,
            'per_coordinate_rates': self.per_coordinate_rates.tolist(),
            'mean_acceptance_rate': float(np.mean(self.acceptance_rates)) if self.acceptance_rates.size else None,
            'failures': [{'repetition': r, 'error': e} for r, e in self.failures],
            'setting': self.setting,
        }

    def to_csv(self, path, extra: Optional[dict] = None) -> Path:
        """Write (repetition, coordinate, covered) rows and a JSON summary next to them.

        Returns:
            Path: the summary path
        """
        path = Path(path)
        rows = ((int(r), j + 1, bool(c)) for r, row in zip(self.indices, self.indicators)
                for j, c in enumerate(row))
        write_csv(path, ['repetition', 'coordinate', 'covered'], rows)
        summary = path.with_suffix('.json')
        write_json(summary, {**self.summary(), **(extra or {})})
        return summary


def pilot_feasibility(setting: CoverageSetting, master_seed: int):
    """Feasibility of one instance drawn from the setting with a dedicated pilot seed."""
    _, instance = simulate_instance(setting.model, derive_seed(master_seed, Stream.PILOT))
    return empirical_feasibility(instance.X, instance.noise_std, setting.sampling_prior,
                                 setting.feasibility)


def _run_repetition(args) -> RepetitionOutcome:
    setting, index, master_seed = args
    seed = derive_seed(master_seed, Stream.REPETITION, index)
    try:
        theta, instance = simulate_instance(setting.model, seed)
        decomp = decompose(instance, offset=setting.gamma_offset)
        config = setting.chain.model_copy(update={'seed': derive_seed(seed, Stream.CHAIN)})
        samples = two_stage_sample(decomp, setting.sampling_prior, config, setting.n_samples)
        lo, hi = credible_intervals(samples, setting.level)
    except SpikeSlabError as e:
        return RepetitionOutcome(index, None, error=f'{type(e).__name__}: {e}')
    return RepetitionOutcome(index, (lo <= theta) & (theta <= hi), samples.acceptance_rate)


def coverage_experiment(setting: CoverageSetting, repetitions: int, master_seed: int,
                        workers: int = 1) -> CoverageResult:
    """Repeated-sampling coverage of the two-stage credible intervals

    Each repetition draws theta from the prior, X from the design law and y
    from the model, runs the two-stage sampler and records which coordinates
    of the true theta fall inside their intervals. Repetition seeds derive
    from the master seed and the repetition index, so the result does not
    depend on the number of workers. Repetitions that raise are recorded
    and left out of the aggregate.

    Args:
        setting (CoverageSetting): the generative and sampler setting
        repetitions (int): number of repetitions R
        master_seed (int): master seed
        workers (int): processes

    Returns:
        CoverageResult: indicators and rates
    """
    if repetitions < 1:
        raise ValueError(f'repetitions must be positive, got {repetitions}')
    pilot = pilot_feasibility(setting, master_seed)
    if not pilot.feasible:
        message = (f'pilot instance is infeasible (best margin {pilot.margin:.3g} '
                   f'at gamma={pilot.gamma_best:.4g})')
        if not setting.force:
            raise InfeasibleSettingError(message + '; set force to run anyway')
        logger.warning(message + '; running anyway')

    outcomes = parallel_map(_run_repetition, [(setting, r, master_seed) for r in range(repetitions)],
                            workers)
    ok = [o for o in outcomes if o.covered is not None]
    failures = [(o.index, o.error) for o in outcomes if o.covered is None]
    if failures:
        logger.warning(f'{len(failures)} of {repetitions} repetitions failed and are excluded')
    d = setting.model.d
    indicators = np.array([o.covered for o in ok], dtype=bool).reshape(len(ok), d)
    rate = float(indicators.mean()) if indicators.size else float('nan')
    per_coordinate = indicators.mean(axis=0) if ok else np.full(d, np.nan)
    logger.info(f'Coverage over {len(ok)} repetitions: {rate:.4f}')
    return CoverageResult(
        repetitions=repetitions,
        indices=np.array([o.index for o in ok], dtype=int),
        indicators=indicators,
        aggregate_rate=rate,
        per_coordinate_rates=per_coordinate,
        failures=failures,
        acceptance_rates=np.array([o.acceptance_rate for o in ok], dtype=float),
        setting=setting.model_dump(mode='json'),
    )


def thinning_sweep(setting: CoverageSetting, thinnings: Sequence[int], repetitions: int,
                   master_seed: int, base_burn_in: Optional[int] = None,
                   workers: int = 1) -> Dict[int, CoverageResult]:
    """Coverage for each thinning g with burn-in B = g * base_burn_in

    All runs share the master seed, so every g sees the same (theta, X, y).
    """
    if base_burn_in is None:
        base_burn_in = setting.chain.burn_in
    results = {}
    for g in thinnings:
        chain = setting.chain.model_copy(update={'thinning': int(g), 'burn_in': int(g) * base_burn_in})
        results[int(g)] = coverage_experiment(setting.model_copy(update={'chain': chain}),
                                              repetitions, master_seed, workers)
    return results
