import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, special

from spikeslab.prior import GaussianSlab, GenericSlab, LaplaceSlab
from spikeslab.utils import QuadratureError

__all__ = ['SlabTransform', 'slab_transform', 'log_half_gaussian_integral', 'tilted_window']

ArrayLike = Union[float, np.ndarray]

_HALF_LOG_PI = 0.5 * math.log(math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
# Half-width of the generic-slab quadrature window in units of 1/sqrt(gamma)
_WINDOW = 12.0
_QUAD_TOL = 1e-10


@dataclass(frozen=True)
class SlabTransform:
    """Gaussian-tilted transform g(x) = int exp(x t - gamma t^2 / 2) mu(dt) at x.

    Stored in log form: log_g together with the mean g'/g and variance
    g''/g - (g'/g)^2 of the tilted law. The raw derivatives are derived from
    these and overflow for large |x|.
    """
    log_g: ArrayLike
    mean: ArrayLike
    variance: ArrayLike

    @property
    def g(self):
        return np.exp(self.log_g)

    @property
    def g_prime(self):
        return self.g * self.mean

    @property
    def g_second(self):
        return self.g * (self.variance + np.square(self.mean))


def log_half_gaussian_integral(b: ArrayLike, gamma: float) -> np.ndarray:
    """log of int_0^inf exp(b t - gamma t^2 / 2) dt, stable for any b."""
    z = -np.asarray(b, dtype=float) / math.sqrt(2.0 * gamma)
    base = _HALF_LOG_PI - 0.5 * math.log(2.0 * gamma)
    safe_pos = np.maximum(z, 0.0)
    safe_neg = np.minimum(z, 0.0)
    # erfcx(z) = exp(z^2) erfc(z) is bounded for z >= 0 and overflows for z << 0
    return np.where(
        z >= 0,
        base + np.log(special.erfcx(safe_pos)),
        base + safe_neg**2 + np.log(special.erfc(safe_neg)),
    )


def _mills(t: np.ndarray) -> np.ndarray:
    """phi(t) / Phi(t), evaluated through erfcx."""
    return _SQRT_2_OVER_PI / special.erfcx(-t / math.sqrt(2.0))


def _gaussian_transform(slab: GaussianSlab, gamma: float, x: np.ndarray) -> SlabTransform:
    a = gamma + 1.0 / slab.variance
    log_g = -0.5 * math.log(slab.variance * a) + x**2 / (2.0 * a)
    return SlabTransform(log_g=log_g, mean=x / a, variance=np.full_like(x, 1.0 / a))


def _laplace_transform(slab: LaplaceSlab, gamma: float, x: np.ndarray) -> SlabTransform:
    lam = slab.rate
    s = 1.0 / math.sqrt(gamma)
    log_pos = log_half_gaussian_integral(x - lam, gamma)
    log_neg = log_half_gaussian_integral(-x - lam, gamma)
    log_g = math.log(lam / 2.0) + np.logaddexp(log_pos, log_neg)

    # Tilted law: mixture of N((x - lam)/gamma, 1/gamma) truncated to t > 0
    # and N((x + lam)/gamma, 1/gamma) truncated to t < 0
    w_pos = special.expit(log_pos - log_neg)
    w_neg = special.expit(log_neg - log_pos)
    t_pos = (x - lam) * s
    t_neg = -(x + lam) * s
    r_pos = _mills(t_pos)
    r_neg = _mills(t_neg)
    e_pos = (x - lam) / gamma + s * r_pos
    e_neg = (x + lam) / gamma - s * r_neg
    v_pos = np.maximum(s**2 * (1.0 - r_pos * (r_pos + t_pos)), 0.0)
    v_neg = np.maximum(s**2 * (1.0 - r_neg * (r_neg + t_neg)), 0.0)

    mean = w_pos * e_pos + w_neg * e_neg
    variance = w_pos * v_pos + w_neg * v_neg + w_pos * w_neg * (e_pos - e_neg) ** 2
    return SlabTransform(log_g=log_g, mean=mean, variance=variance)


def tilted_window(gamma: float, x: float, radius: float = np.inf):
    """Interval carrying the tilted generic-slab mass at x."""
    center = x / gamma
    s = 1.0 / math.sqrt(gamma)
    lo = min(0.0, center) - _WINDOW * s
    hi = max(0.0, center) + _WINDOW * s
    return max(lo, -radius), min(hi, radius)


def _quad(f, lo, hi, points):
    out = integrate.quad(f, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200,
                         points=points, full_output=1)
    if len(out) == 4:
        raise QuadratureError(f'quadrature on [{lo}, {hi}] did not converge: {out[3]}')
    return out[0]


def _generic_point(slab: GenericSlab, gamma: float, x: float):
    lo, hi = tilted_window(gamma, x)
    points = sorted({p for p in (0.0, x / gamma) if lo < p < hi}) or None
    grid = np.linspace(lo, hi, 257)
    shift = float(np.max(x * grid - 0.5 * gamma * grid**2 + slab.log_pdf(grid)))

    def weight(t):
        return math.exp(x * t - 0.5 * gamma * t * t + slab.log_pdf_at(t) - shift)

    mass = _quad(weight, lo, hi, points)
    if not mass > 0:
        raise QuadratureError(f'tilted mass vanished at x={x}')
    mean = _quad(lambda t: t * weight(t), lo, hi, points) / mass
    variance = _quad(lambda t: (t - mean) ** 2 * weight(t), lo, hi, points) / mass
    return shift + math.log(mass), mean, variance


def _generic_transform(slab: GenericSlab, gamma: float, x: np.ndarray) -> SlabTransform:
    values = np.array([_generic_point(slab, gamma, float(v)) for v in x.ravel()]).reshape(x.shape + (3,))
    return SlabTransform(log_g=values[..., 0], mean=values[..., 1], variance=values[..., 2])


def slab_transform(slab, gamma: float, x: ArrayLike) -> SlabTransform:
    """Evaluate the tilted transform of a slab at x

    Gaussian and Laplace slabs use closed forms; generic slabs use adaptive
    Gauss-Kronrod quadrature on a window around [0, x/gamma].

    Args:
        slab (SlabFamily): the slab mu
        gamma (float): tilt curvature, positive
        x (float | np.ndarray): query point(s)

    Returns:
        SlabTransform: log g, tilted mean and tilted variance, shaped like x
    """
    if not gamma > 0:
        raise ValueError(f'gamma must be positive, got {gamma}')
    scalar = np.ndim(x) == 0
    x = np.asarray(x, dtype=float)
    if isinstance(slab, GaussianSlab):
        out = _gaussian_transform(slab, gamma, x)
    elif isinstance(slab, LaplaceSlab):
        out = _laplace_transform(slab, gamma, x)
    elif isinstance(slab, GenericSlab):
        out = _generic_transform(slab, gamma, x)
    else:
        raise TypeError(f'unsupported slab {type(slab).__name__}')
    if scalar:
        return SlabTransform(float(out.log_g), float(out.mean), float(out.variance))
    return out
