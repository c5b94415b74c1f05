from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import fft

from spikeslab.utils import PreconditionError, get_logger, write_csv, write_json

__all__ = ['DiagnosticsBundle', 'autocorrelation', 'effective_sample_size', 'chain_diagnostics']

logger = get_logger(__name__)


def autocorrelation(x: np.ndarray) -> np.ndarray:
    """Biased autocorrelation estimate at every lag, computed with an FFT.

    Returns all-NaN beyond lag 0 when the series is constant.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    centered = x - x.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centered, size)
    acov = fft.irfft(spectrum * np.conjugate(spectrum), size)[:n] / n
    if np.all(x == x[0]) or acov[0] <= 0:
        out = np.full(n, np.nan)
        out[0] = 1.0
        return out
    return acov / acov[0]


def effective_sample_size(rho: np.ndarray) -> float:
    """N / (1 + 2 sum rho(k)), the sum stopping before the first negative rho(k)."""
    if rho.size > 1 and np.isnan(rho[1]):
        return float('nan')
    negative = np.nonzero(rho[1:] < 0)[0]
    stop = negative[0] + 1 if negative.size else rho.size
    return float(rho.size / (1.0 + 2.0 * np.sum(rho[1:stop])))


@dataclass(frozen=True)
class DiagnosticsBundle:
    """Trace, autocorrelations and effective sample size of one coordinate.

    A constant trace has zero variance; the bundle is then flagged
    `degenerate` with NaN autocorrelations past lag 0 and a NaN ESS.
    """
    coordinate: int
    trace: np.ndarray
    autocorrelation: np.ndarray
    ess: float
    acceptance_rate: Optional[float]
    degenerate: bool

    def to_csv(self, path, extra: Optional[dict] = None):
        """Write (step, value) to path, (lag, autocorrelation) next to it and a JSON summary.

        The summary reports the coordinate 1-based, like every other output file.
        """
        path = Path(path)
        write_csv(path, ['step', 'value'], enumerate(self.trace))
        write_csv(path.with_suffix('.acf.csv'), ['lag', 'autocorrelation'],
                  enumerate(self.autocorrelation))
        write_json(path.with_suffix('.json'), {
            'coordinate': self.coordinate + 1,
            'length': int(self.trace.size),
            'ess': None if np.isnan(self.ess) else self.ess,
            'acceptance_rate': self.acceptance_rate,
            'degenerate': self.degenerate,
            **(extra or {}),
        })


def chain_diagnostics(chain: np.ndarray, coordinate: int, max_lag: int,
                      acceptance_rate: Optional[float] = None) -> DiagnosticsBundle:
    """Trace and autocorrelation diagnostics for one coordinate of a chain

    Args:
        chain (np.ndarray): N x d states (phi or theta)
        coordinate (int): coordinate index
        max_lag (int): largest lag reported, less than N
        acceptance_rate (float, optional): carried through from the sampler

    Returns:
        DiagnosticsBundle: the diagnostics
    """
    chain = np.asarray(chain, dtype=float)
    if chain.ndim == 1:
        chain = chain[:, None]
    if not 0 <= coordinate < chain.shape[1]:
        raise IndexError(f'coordinate {coordinate} out of range for d={chain.shape[1]}')
    if chain.shape[0] <= max_lag:
        raise PreconditionError(f'chain of length {chain.shape[0]} is too short for max_lag={max_lag}')
    trace = chain[:, coordinate].copy()
    rho = autocorrelation(trace)
    degenerate = bool(np.isnan(rho[1:]).any()) if rho.size > 1 else False
    if degenerate:
        logger.warning(f'Coordinate {coordinate} has a constant trace; autocorrelation undefined')
    return DiagnosticsBundle(coordinate, trace, rho[:max_lag + 1], effective_sample_size(rho),
                             acceptance_rate, degenerate)
