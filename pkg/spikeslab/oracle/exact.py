import math
from dataclasses import dataclass
from functools import partial
from typing import Tuple

import numpy as np
from scipy import integrate, linalg, special

from spikeslab.prior import GaussianSlab, RegressionInstance, SpikeSlabPrior
from spikeslab.utils import PreconditionError, Stream, as_generator, get_logger, parallel_map

__all__ = [
    'MAX_EXACT_DIM',
    'ExactPosterior',
    'pattern_masks',
    'enumerate_exact_posterior',
    'exact_marginal_query',
    'exact_marginal_density',
    'sample_exact',
    'wasserstein_to_exact',
]

logger = get_logger(__name__)

MAX_EXACT_DIM = 20
_CHUNK = 4096


def pattern_masks(d: int) -> np.ndarray:
    """All 2^d support patterns as booleans; row m has coordinate i set iff bit i of m is."""
    m = np.arange(2**d)[:, None]
    return ((m >> np.arange(d)) & 1).astype(bool)


@dataclass(frozen=True)
class ExactPosterior:
    """Posterior under a Gaussian slab as a mixture over support patterns.

    Pattern m has support {i : bit i of m set}. Given the pattern, theta is
    Gaussian on the support with mean means[m] and marginal variances
    variances[m] (zeros off the support). Full covariances are recomputed on
    demand by `covariance`.
    """
    patterns: np.ndarray
    log_weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    instance: RegressionInstance
    prior: SpikeSlabPrior

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def d(self) -> int:
        return self.patterns.shape[1]

    def covariance(self, m: int) -> np.ndarray:
        """Sigma_S of pattern m on its support coordinates."""
        support = self.patterns[m]
        precision, _ = _pattern_system(self.instance, self.prior.slab.variance, support)
        return linalg.cho_solve(linalg.cho_factor(precision, lower=True), np.eye(precision.shape[0]))

    def atom_probabilities(self) -> np.ndarray:
        """P(theta_i = 0) for every coordinate."""
        return self.weights @ (~self.patterns)


def _pattern_system(instance: RegressionInstance, v: float, support: np.ndarray):
    sigma2 = instance.noise_std**2
    Xs = instance.X[:, support]
    precision = Xs.T @ Xs / sigma2 + np.eye(Xs.shape[1]) / v
    b = Xs.T @ instance.y / sigma2
    return precision, b


def _enumerate_chunk(bounds: Tuple[int, int], instance: RegressionInstance,
                     prior: SpikeSlabPrior) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    start, stop = bounds
    n, d = instance.X.shape
    v = prior.slab.variance
    sigma2 = instance.noise_std**2
    yy = float(instance.y @ instance.y) / sigma2
    const = n * math.log(2 * math.pi) + n * math.log(sigma2) + yy
    masks = pattern_masks(d)[start:stop]

    log_w = np.empty(stop - start)
    means = np.zeros((stop - start, d))
    variances = np.zeros((stop - start, d))
    for k, support in enumerate(masks):
        size = int(support.sum())
        log_lik = -0.5 * const
        if size:
            precision, b = _pattern_system(instance, v, support)
            cho = linalg.cho_factor(precision, lower=True)
            mu = linalg.cho_solve(cho, b)
            logdet = 2.0 * float(np.sum(np.log(np.diag(cho[0]))))
            log_lik = -0.5 * (const + size * math.log(v) + logdet - float(b @ mu))
            means[k, support] = mu
            variances[k, support] = np.diag(linalg.cho_solve(cho, np.eye(size)))
        log_w[k] = size * prior.log_q + (d - size) * prior.log_1mq + log_lik
    return log_w, means, variances


def enumerate_exact_posterior(instance: RegressionInstance, prior: SpikeSlabPrior,
                              workers: int = 1) -> ExactPosterior:
    """Enumerate the exact posterior over all 2^d support patterns

    For each support S the log-weight is
    |S| log q + (d - |S|) log(1 - q) + log N(y; 0, sigma^2 I + v X_S X_S^T)
    and theta_S | S ~ N(mu_S, Sigma_S) with Sigma_S = (X_S^T X_S / sigma^2 + I/v)^{-1}
    and mu_S = Sigma_S X_S^T y / sigma^2.

    Args:
        instance (RegressionInstance): observed data, d <= 20
        prior (SpikeSlabPrior): prior with a Gaussian slab
        workers (int): processes for the enumeration; chunks are reduced in pattern order

    Returns:
        ExactPosterior: normalized pattern weights and conditional moments
    """
    if not isinstance(prior.slab, GaussianSlab):
        raise PreconditionError('exact enumeration needs a Gaussian slab')
    d = instance.d
    if d > MAX_EXACT_DIM:
        raise PreconditionError(f'exact enumeration is capped at d={MAX_EXACT_DIM}, got d={d}')
    total = 2**d
    chunks = [(start, min(start + _CHUNK, total)) for start in range(0, total, _CHUNK)]
    parts = parallel_map(partial(_enumerate_chunk, instance=instance, prior=prior), chunks, workers)
    log_w = np.concatenate([p[0] for p in parts])
    log_w -= special.logsumexp(log_w)
    logger.debug(f'Enumerated {total} support patterns')
    return ExactPosterior(
        patterns=pattern_masks(d),
        log_weights=log_w,
        means=np.concatenate([p[1] for p in parts]),
        variances=np.concatenate([p[2] for p in parts]),
        instance=instance,
        prior=prior,
    )


def _coordinate_mixture(post: ExactPosterior, i: int):
    if not 0 <= i < post.d:
        raise IndexError(f'coordinate {i} out of range for d={post.d}')
    on = post.patterns[:, i]
    weights = post.weights
    return float(weights[~on].sum()), weights[on], post.means[on, i], np.sqrt(post.variances[on, i])


def exact_marginal_query(post: ExactPosterior, i: int, t) -> Tuple[float, np.ndarray]:
    """Atom mass at zero and CDF at t of the marginal of coordinate i

    Returns:
        tuple: (atom_prob, cdf_at_t); cdf_at_t has the shape of t
    """
    atom, w, mu, sd = _coordinate_mixture(post, i)
    t = np.asarray(t, dtype=float)
    cont = special.ndtr((t[..., None] - mu) / sd) @ w
    cdf = cont + atom * (t >= 0)
    return atom, (float(cdf) if cdf.ndim == 0 else cdf)


def exact_marginal_density(post: ExactPosterior, i: int, t) -> np.ndarray:
    """Density of the continuous part of the marginal of coordinate i."""
    _, w, mu, sd = _coordinate_mixture(post, i)
    t = np.asarray(t, dtype=float)
    z = (t[..., None] - mu) / sd
    return np.exp(-0.5 * z**2) / (math.sqrt(2 * math.pi) * sd) @ w


def sample_exact(post: ExactPosterior, n_samples: int, seed) -> np.ndarray:
    """Exact posterior draws: a pattern by its weight, then the Gaussian conditional."""
    rng = as_generator(seed, Stream.EXACT)
    weights = post.weights
    picks = rng.choice(weights.size, size=n_samples, p=weights / weights.sum())
    out = np.zeros((n_samples, post.d))
    for m in np.unique(picks):
        rows = np.nonzero(picks == m)[0]
        support = post.patterns[m]
        if not support.any():
            continue
        chol = np.linalg.cholesky(post.covariance(m))
        z = rng.standard_normal((rows.size, int(support.sum())))
        out[np.ix_(rows, np.nonzero(support)[0])] = post.means[m, support] + z @ chol.T
    return out


def wasserstein_to_exact(post: ExactPosterior, samples: np.ndarray, i: int,
                         grid_points: int = 20001) -> float:
    """W1 distance between the empirical and exact marginals of coordinate i

    Computed as the integral of |F_emp - F_exact| on a grid spanning the
    samples and eight conditional standard deviations around every
    pattern mean.
    """
    x = np.sort(np.asarray(samples, dtype=float)[:, i])
    _, _, mu, sd = _coordinate_mixture(post, i)
    lo = min(x[0], 0.0, float(np.min(mu - 8 * sd)) if mu.size else 0.0)
    hi = max(x[-1], 0.0, float(np.max(mu + 8 * sd)) if mu.size else 0.0)
    grid = np.union1d(np.linspace(lo, hi, grid_points), [0.0])
    empirical = np.searchsorted(x, grid, side='right') / x.size
    _, exact = exact_marginal_query(post, i, grid)
    return float(integrate.trapezoid(np.abs(empirical - exact), grid))
