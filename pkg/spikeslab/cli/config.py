import math
import re
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from spikeslab.experiments import CoverageSetting
from spikeslab.feasibility import FeasibilitySettings, ParameterAxis, check_parameter
from spikeslab.potential import DEFAULT_GAMMA_OFFSET, Decomposition, decompose
from spikeslab.prior import DesignSpec, LinearModel, RegressionInstance, SlabFamily, SpikeSlabPrior
from spikeslab.samplers import ChainConfig, HmcMethod, MalaMethod, RejectionPolicy
from spikeslab.utils import ConfigError, Stream, derive_seed, load_setting, read_document

__all__ = [
    'ModelSection',
    'DecompositionSection',
    'SamplerSection',
    'ExperimentSection',
    'RegionSection',
    'DiagnoseSection',
    'OracleSection',
    'RunConfig',
    'load_run_config',
]

_AUTO_GAMMA = re.compile(r'^auto(?:\+(?P<offset>\d+(?:\.\d*)?(?:[eE][-+]?\d+)?))?$')

_Section = ConfigDict(frozen=True, extra='forbid')


def _flatten_params(data):
    """Accept {kind, params: {...}} as well as the flat {kind, ...} form."""
    if isinstance(data, dict) and isinstance(data.get('params'), dict):
        data = {**{k: v for k, v in data.items() if k != 'params'}, **data['params']}
    return data


class ModelSection(BaseModel):
    """Generative model. Exactly one of sigma_d and sigma0 (sigma_d = sqrt(d) sigma0)."""
    model_config = _Section

    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    q: float = Field(..., gt=0, lt=1)
    slab: SlabFamily
    sigma_d: Optional[float] = Field(None, gt=0)
    sigma0: Optional[float] = Field(None, gt=0)
    design: DesignSpec

    @field_validator('slab', 'design', mode='before')
    @classmethod
    def _params(cls, value):
        return _flatten_params(value)

    @model_validator(mode='after')
    def _one_noise_level(self):
        if (self.sigma_d is None) == (self.sigma0 is None):
            raise ValueError('give exactly one of sigma_d and sigma0')
        return self

    @property
    def noise_std(self) -> float:
        return self.sigma_d if self.sigma_d is not None else math.sqrt(self.d) * self.sigma0

    @property
    def prior(self) -> SpikeSlabPrior:
        return SpikeSlabPrior(q=self.q, slab=self.slab)

    def linear_model(self) -> LinearModel:
        return LinearModel(n=self.n, d=self.d, prior=self.prior, design=self.design,
                           noise_std=self.noise_std)


class DecompositionSection(BaseModel):
    """gamma as a number, or 'auto+<offset>' for lambda_max + offset."""
    model_config = _Section

    gamma: Union[float, str] = f'auto+{DEFAULT_GAMMA_OFFSET}'

    @field_validator('gamma')
    @classmethod
    def _check_gamma(cls, gamma):
        if isinstance(gamma, str):
            if not _AUTO_GAMMA.match(gamma.strip()):
                raise ValueError(f'gamma must be a positive number or "auto+<offset>", got {gamma!r}')
            return gamma.strip()
        if not gamma > 0:
            raise ValueError(f'gamma must be positive, got {gamma}')
        return gamma

    @property
    def offset(self) -> float:
        match = _AUTO_GAMMA.match(self.gamma) if isinstance(self.gamma, str) else None
        if match is None:
            return DEFAULT_GAMMA_OFFSET
        return float(match.group('offset')) if match.group('offset') else DEFAULT_GAMMA_OFFSET

    def resolve(self, instance: RegressionInstance) -> Decomposition:
        if isinstance(self.gamma, str):
            return decompose(instance, offset=self.offset)
        return decompose(instance, gamma=float(self.gamma))


class SamplerSection(BaseModel):
    """Flat sampler keys; B is the burn-in.

    Every subcommand samples through the two-stage sampler, which runs
    K = B + N g steps, so an explicit chain length K is rejected.
    """
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    method: Literal['mala', 'hmc'] = 'mala'
    tau: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = Field(None, gt=0)
    ell: Optional[int] = Field(None, ge=1)
    mass: Optional[List[List[float]]] = None
    burn_in: Optional[int] = Field(None, ge=0, alias='B')
    thinning: int = Field(1, ge=1)
    rejection_policy: RejectionPolicy = RejectionPolicy.STAY
    max_retries: int = Field(10_000, ge=1)
    seed: Optional[int] = None
    init_smoothness: float = Field(10.0, gt=0, alias='L')
    learning_rate: float = Field(0.01, gt=0)
    max_iters: int = Field(100_000, ge=1)

    @model_validator(mode='before')
    @classmethod
    def _no_chain_length(cls, data):
        if isinstance(data, dict) and ('K' in data or 'total_steps' in data):
            raise ValueError('K is derived as B + N g by the two-stage sampler; '
                             'set B, thinning and the sample count instead')
        return data

    @model_validator(mode='after')
    def _method_keys(self):
        if self.method == 'mala' and (self.epsilon is not None or self.ell is not None or self.mass is not None):
            raise ValueError('epsilon, ell and mass apply to method hmc only')
        if self.method == 'hmc' and self.tau is not None:
            raise ValueError('tau applies to method mala only')
        return self

    def chain_config(self, master_seed: int, **overrides) -> ChainConfig:
        if self.method == 'mala':
            method = MalaMethod(**({'tau': self.tau} if self.tau is not None else {}))
        else:
            keys = {'epsilon': self.epsilon, 'ell': self.ell, 'mass': self.mass}
            method = HmcMethod(**{k: v for k, v in keys.items() if v is not None})
        values = dict(
            method=method,
            thinning=self.thinning,
            rejection_policy=self.rejection_policy,
            max_retries=self.max_retries,
            seed=self.seed if self.seed is not None else derive_seed(master_seed, Stream.CHAIN),
            init_smoothness=self.init_smoothness,
            learning_rate=self.learning_rate,
            max_iters=self.max_iters,
        )
        if self.burn_in is not None:
            values['burn_in'] = self.burn_in
        values.update(overrides)
        return ChainConfig(**values)


class ExperimentSection(BaseModel):
    model_config = _Section

    repetitions: int = Field(200, ge=1)
    samples: int = Field(2000, ge=0)
    level: float = Field(0.95, gt=0, lt=1)
    force: bool = False
    assumed_slab: Optional[SlabFamily] = None
    thinnings: List[int] = [1, 5, 10]

    @field_validator('assumed_slab', mode='before')
    @classmethod
    def _params(cls, value):
        return _flatten_params(value)


class SliceSection(BaseModel):
    model_config = _Section

    name: Literal['delta', 'sigma0', 'q']
    values: List[float] = Field(..., min_length=1)

    @model_validator(mode='after')
    def _in_range(self):
        for value in self.values:
            check_parameter(self.name, value)
        return self


class RegionSection(BaseModel):
    """Asymptotic feasibility scan; the slab defaults to the model's."""
    model_config = _Section

    axis1: ParameterAxis
    axis2: ParameterAxis
    fixed: Dict[Literal['delta', 'sigma0', 'q'], float] = {}
    slices: Optional[SliceSection] = None
    slab: Optional[SlabFamily] = None

    @field_validator('slab', mode='before')
    @classmethod
    def _params(cls, value):
        return _flatten_params(value)

    @field_validator('fixed')
    @classmethod
    def _fixed_in_range(cls, fixed):
        for name, value in fixed.items():
            check_parameter(name, value)
        return fixed

    @model_validator(mode='after')
    def _cover_parameters(self):
        names = [self.axis1.name, self.axis2.name, *self.fixed]
        if self.slices is not None:
            names.append(self.slices.name)
        if sorted(names) != ['delta', 'q', 'sigma0']:
            raise ValueError('axes, fixed values and slices must cover delta, sigma0 and q exactly once')
        return self


class DiagnoseSection(BaseModel):
    model_config = _Section

    max_lag: int = Field(50, ge=0)
    chain: Literal['theta', 'phi'] = 'theta'
    samples: int = Field(10_000, ge=1)


class OracleSection(BaseModel):
    model_config = _Section

    points: int = Field(201, ge=2)
    lo: Optional[float] = None
    hi: Optional[float] = None


class RunConfig(BaseModel):
    """Top-level run configuration; unknown keys anywhere are rejected."""
    model_config = _Section

    model: Optional[ModelSection] = None
    decomposition: DecompositionSection = DecompositionSection()
    sampler: SamplerSection = SamplerSection()
    experiment: ExperimentSection = ExperimentSection()
    feasibility: FeasibilitySettings = FeasibilitySettings()
    region: Optional[RegionSection] = None
    diagnose: DiagnoseSection = DiagnoseSection()
    oracle: OracleSection = OracleSection()
    seed: int = 0

    def require_model(self) -> ModelSection:
        if self.model is None:
            raise ConfigError('this subcommand needs a model section')
        return self.model

    def coverage_setting(self) -> CoverageSetting:
        model = self.require_model()
        return CoverageSetting(
            model=model.linear_model(),
            chain=self.sampler.chain_config(self.seed),
            n_samples=self.experiment.samples,
            level=self.experiment.level,
            assumed_slab=self.experiment.assumed_slab,
            gamma_offset=self.decomposition.offset,
            force=self.experiment.force,
            feasibility=self.feasibility,
        )


def load_run_config(source: str, seed: Optional[int] = None) -> RunConfig:
    """Load a RunConfig from a JSON/YAML file or the name of a shipped setting

    Args:
        source (str): path, or setting name under benchmark/configs
        seed (int, optional): overrides the top-level seed

    Returns:
        RunConfig: the validated configuration
    """
    data = read_document(source) if Path(source).exists() else load_setting(source)
    if seed is not None:
        data = {**data, 'seed': seed}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f'invalid configuration {source}:\n{e}') from e
