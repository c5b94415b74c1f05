import math
from typing import Annotated, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy import integrate, stats

from spikeslab.utils import Stream, as_generator

__all__ = [
    'GaussianSlab',
    'LaplaceSlab',
    'GenericSlab',
    'SlabFamily',
    'SpikeSlabPrior',
    'NAMED_LOG_DENSITIES',
    'sample_prior',
    'tabulated_inverse_cdf',
]

# Half-width of the grid used to check concavity and symmetry of generic slabs
_CHECK_RADIUS = 10.0
_CHECK_POINTS = 401


def _total_mass(log_pdf: Callable[[float], float]) -> float:
    """Integrate exp(log_pdf) over the real line, split at the origin."""
    f = lambda t: math.exp(log_pdf(t))
    left, _ = integrate.quad(f, -np.inf, 0.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    right, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return left + right


def _evaluate(fn: Callable, theta: np.ndarray) -> np.ndarray:
    """Call fn on an array, falling back to elementwise calls for scalar-only callables."""
    theta = np.asarray(theta, dtype=float)
    try:
        out = np.asarray(fn(theta), dtype=float)
        if out.shape == theta.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.vectorize(lambda t: float(fn(float(t))), otypes=[float])(theta)


def tabulated_inverse_cdf(log_density: np.ndarray, grid: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Invert a CDF tabulated by the trapezoid rule on a grid.

    Args:
        log_density (np.ndarray): unnormalized log density on the grid
        grid (np.ndarray): increasing abscissae
        u (np.ndarray): uniforms in [0, 1)

    Returns:
        np.ndarray: quantiles at u
    """
    density = np.exp(log_density - np.max(log_density))
    cdf = integrate.cumulative_trapezoid(density, grid, initial=0.0)
    cdf /= cdf[-1]
    return np.interp(u, cdf, grid)


class GaussianSlab(BaseModel):
    """Centered Gaussian slab N(0, variance)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal['gaussian'] = 'gaussian'
    variance: float = Field(1.0, gt=0)

    @model_validator(mode='after')
    def _check_normalized(self):
        mass = _total_mass(self.log_pdf)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f'Gaussian slab integrates to {mass}, expected 1')
        return self

    @property
    def distribution(self):
        return stats.norm(loc=0.0, scale=math.sqrt(self.variance))

    def log_pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -0.5 * theta**2 / self.variance - 0.5 * math.log(2 * math.pi * self.variance)

    def second_moment(self) -> float:
        return self.variance

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.normal(0.0, math.sqrt(self.variance), size)


class LaplaceSlab(BaseModel):
    """Laplace slab with density (rate/2) exp(-rate |x|)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal['laplace'] = 'laplace'
    rate: float = Field(math.sqrt(2.0), gt=0)

    @model_validator(mode='after')
    def _check_normalized(self):
        mass = _total_mass(self.log_pdf)
        if abs(mass - 1.0) > 1e-8:
            raise ValueError(f'Laplace slab integrates to {mass}, expected 1')
        return self

    @property
    def distribution(self):
        return stats.laplace(loc=0.0, scale=1.0 / self.rate)

    def log_pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        return math.log(self.rate / 2) - self.rate * np.abs(theta)

    def second_moment(self) -> float:
        return 2.0 / self.rate**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.laplace(0.0, 1.0 / self.rate, size)


def _logistic_log_density(theta):
    a = np.abs(theta)
    return -a - 2.0 * np.log1p(np.exp(-a))


def _normal_log_density(theta):
    return -0.5 * np.asarray(theta) ** 2


# Picklable symmetric log-concave densities that configs can refer to by name,
# with tail constants (k, c1, c2) satisfying f(x) >= c1 exp(-c2 x^(2k))
NAMED_LOG_DENSITIES = {
    'logistic': (_logistic_log_density, 1, math.exp(-0.25) / 4, 1.0),
    'normal': (_normal_log_density, 1, 1.0 / math.sqrt(2 * math.pi), 0.5),
}


class GenericSlab(BaseModel):
    """Symmetric log-concave slab given by a log-density evaluator.

    The evaluator may be unnormalized; the normalizing constant is computed
    by quadrature at construction. Construction rejects evaluators that are
    not concave or not symmetric on a test grid, and tail constants that
    violate f(x) >= c1 exp(-c2 x^(2k)) there.

    Args:
        log_density (Callable): log density, scalar or vectorized
        tail_order (int): k in the tail lower bound
        c1 (float): tail constant
        c2 (float): tail constant
        name (str, optional): key into NAMED_LOG_DENSITIES, used instead of log_density
    """
    model_config = ConfigDict(frozen=True)

    kind: Literal['generic'] = 'generic'
    log_density: Optional[Callable] = Field(None, exclude=True)
    name: Optional[str] = None
    tail_order: int = Field(1, ge=1)
    c1: float = Field(1e-3, gt=0)
    c2: float = Field(1.0, gt=0)

    _log_norm: float = PrivateAttr(0.0)
    _radius: float = PrivateAttr(1.0)

    @classmethod
    def named(cls, name: str) -> 'GenericSlab':
        """Build one of the registered densities with its tail constants."""
        if name not in NAMED_LOG_DENSITIES:
            raise ValueError(f'unknown generic slab {name!r}; known: {sorted(NAMED_LOG_DENSITIES)}')
        _, k, c1, c2 = NAMED_LOG_DENSITIES[name]
        return cls(name=name, tail_order=k, c1=c1, c2=c2)

    @model_validator(mode='before')
    @classmethod
    def _resolve_name(cls, data):
        if isinstance(data, dict) and data.get('log_density') is None and data.get('name'):
            if data['name'] not in NAMED_LOG_DENSITIES:
                raise ValueError(f'unknown generic slab {data["name"]!r}')
            data = {**data, 'log_density': NAMED_LOG_DENSITIES[data['name']][0]}
        return data

    @model_validator(mode='after')
    def _check_shape(self):
        if self.log_density is None:
            raise ValueError('a generic slab needs log_density or name')
        grid = np.linspace(-_CHECK_RADIUS, _CHECK_RADIUS, _CHECK_POINTS)
        values = _evaluate(self.log_density, grid)
        if not np.all(np.isfinite(values)):
            raise ValueError('log density must be finite on [-10, 10]')
        if np.max(np.diff(values, 2)) > 1e-8:
            raise ValueError('log density is not concave')
        if np.max(np.abs(values - values[::-1])) > 1e-8:
            raise ValueError('log density is not symmetric about 0')

        mass = _total_mass(lambda t: float(_evaluate(self.log_density, np.array([t]))[0]))
        if not np.isfinite(mass) or mass <= 0:
            raise ValueError(f'log density does not integrate to a positive finite mass ({mass})')
        self._log_norm = math.log(mass)

        bound = math.log(self.c1) - self.c2 * grid ** (2 * self.tail_order)
        if np.any(values - self._log_norm < bound - 1e-9):
            raise ValueError('tail constants violate f(x) >= c1 exp(-c2 x^(2k))')

        # Outward doubling terminates since log-concave densities decay exponentially
        peak = values[_CHECK_POINTS // 2]
        radius = 1.0
        while self._raw(radius) > peak - 50.0:
            radius *= 2.0
        self._radius = radius
        return self

    def _raw(self, t: float) -> float:
        return float(_evaluate(self.log_density, np.array([t]))[0])

    def log_pdf(self, theta):
        return _evaluate(self.log_density, theta) - self._log_norm

    def log_pdf_at(self, t: float) -> float:
        """Normalized log density at a single point."""
        return self._raw(t) - self._log_norm

    def second_moment(self) -> float:
        f = lambda t: t * t * math.exp(self._raw(t) - self._log_norm)
        value, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
        return 2.0 * value

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        grid = np.linspace(-self._radius, self._radius, 4097)
        return tabulated_inverse_cdf(self.log_pdf(grid), grid, rng.random(size))


SlabFamily = Annotated[Union[GaussianSlab, LaplaceSlab, GenericSlab], Field(discriminator='kind')]


class SpikeSlabPrior(BaseModel):
    """Product prior (1 - q) delta_0 + q mu on each coordinate.

    Args:
        q (float): weight on the slab, strictly between 0 and 1
        slab (SlabFamily): the slab mu
    """
    model_config = ConfigDict(frozen=True)

    q: float = Field(..., gt=0, lt=1)
    slab: SlabFamily

    @property
    def log_q(self) -> float:
        return math.log(self.q)

    @property
    def log_1mq(self) -> float:
        return math.log1p(-self.q)


def sample_prior(prior: SpikeSlabPrior, d: int, seed) -> np.ndarray:
    """Draw one coefficient vector from the prior

    Args:
        prior (SpikeSlabPrior): the prior
        d (int): dimension
        seed (int | np.random.Generator): master seed or generator

    Returns:
        np.ndarray: d-vector with exact zeros on the spike
    """
    if d < 1:
        raise ValueError(f'd must be positive, got {d}')
    rng = as_generator(seed, Stream.PRIOR)
    on_slab = rng.random(d) < prior.q
    values = prior.slab.sample(rng, d)
    return np.where(on_slab, values, 0.0)
