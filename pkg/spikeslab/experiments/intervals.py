from typing import Tuple, Union

import numpy as np

from spikeslab.samplers import SampleSet
from spikeslab.utils import PreconditionError

__all__ = ['MIN_INTERVAL_SAMPLES', 'credible_intervals']

MIN_INTERVAL_SAMPLES = 40


def credible_intervals(samples: Union[SampleSet, np.ndarray],
                       level: float = 0.95) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-tailed credible intervals per coordinate

    Quantiles at (1 - level)/2 and 1 - (1 - level)/2 by linear interpolation
    between order statistics.

    Args:
        samples (SampleSet | np.ndarray): N x d draws, N >= 40
        level (float): credibility level in (0, 1)

    Returns:
        tuple: (lo, hi) d-vectors
    """
    thetas = samples.thetas if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if not 0 < level < 1:
        raise ValueError(f'level must lie in (0, 1), got {level}')
    if thetas.ndim != 2 or thetas.shape[0] < MIN_INTERVAL_SAMPLES:
        raise PreconditionError(
            f'credible intervals need at least {MIN_INTERVAL_SAMPLES} draws, got {thetas.shape[0]}')
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(thetas, [tail, 1.0 - tail], axis=0, method='linear')
    return lo, hi
