from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from spikeslab.prior import SlabFamily, SpikeSlabPrior
from spikeslab.utils import get_logger, parallel_map, write_csv
from .feasibility import AsymptoticPoint, FeasibilityReport, FeasibilitySettings, asymptotic_feasibility

__all__ = ['ParameterAxis', 'RegionScan', 'check_parameter', 'scan_region', 'scan_slices', 'write_region_csv']

logger = get_logger(__name__)

MAX_GRID_POINTS = 10**6

Parameter = Literal['delta', 'sigma0', 'q']


def check_parameter(name: str, value: float) -> float:
    """Raise ValueError unless value lies in the range of the named parameter."""
    if name == 'q':
        if not 0.0 < value < 1.0:
            raise ValueError(f'q must lie in (0, 1), got {value}')
    elif not value > 0.0:
        raise ValueError(f'{name} must be positive, got {value}')
    return value


class ParameterAxis(BaseModel):
    """Values of one asymptotic parameter along a scan axis.

    Either give `values` explicitly or a (start, stop, num) range, log-spaced
    when `log` is set.
    """
    model_config = ConfigDict(frozen=True, extra='forbid')

    name: Parameter
    values: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: int = Field(20, ge=1)
    log: bool = False

    @model_validator(mode='after')
    def _check_range(self):
        if self.values is None and (self.start is None or self.stop is None):
            raise ValueError(f'axis {self.name}: give values or start/stop')
        ends = self.values if self.values is not None else [self.start, self.stop]
        for value in ends:
            check_parameter(self.name, value)
        return self

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.num == 1:
            return np.array([self.start], dtype=float)
        if self.log:
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class RegionScan:
    """Verdicts on a rectangular grid, indexed [i, j] for axis1[i], axis2[j]."""
    axis1: str
    axis2: str
    values1: np.ndarray
    values2: np.ndarray
    reports: List[List[FeasibilityReport]]
    fixed: Dict[str, float]

    @property
    def feasible(self) -> np.ndarray:
        return np.array([[r.feasible for r in row] for row in self.reports])

    def boundary(self) -> List[Tuple[float, float]]:
        """Polyline through the verdict changes along axis2, one vertex per switch.

        Each vertex sits at the midpoint between the two grid values whose
        verdicts differ.
        """
        feasible = self.feasible
        points = []
        for i, a in enumerate(self.values1):
            flips = np.nonzero(feasible[i, 1:] != feasible[i, :-1])[0]
            for j in flips:
                points.append((float(a), float(0.5 * (self.values2[j] + self.values2[j + 1]))))
        return points


def _evaluate(params: Dict[str, float], slab, settings: FeasibilitySettings) -> FeasibilityReport:
    prior = SpikeSlabPrior(q=params['q'], slab=slab)
    point = AsymptoticPoint(delta=params['delta'], sigma0=params['sigma0'], prior=prior)
    return asymptotic_feasibility(point, settings)


def scan_region(axis1: ParameterAxis, axis2: ParameterAxis, fixed: Dict[str, float],
                slab: SlabFamily, settings: Optional[FeasibilitySettings] = None,
                workers: int = 1) -> RegionScan:
    """Evaluate asymptotic feasibility on a two-parameter grid

    Args:
        axis1 (ParameterAxis): first scanned parameter
        axis2 (ParameterAxis): second scanned parameter
        fixed (dict): value of the remaining parameter among delta, sigma0, q
        slab (SlabFamily): slab of the prior
        settings (FeasibilitySettings, optional): gamma grid settings
        workers (int): process count; output order is by grid index

    Returns:
        RegionScan: the grid of reports
    """
    names = {axis1.name, axis2.name, *fixed}
    if axis1.name == axis2.name or names != {'delta', 'sigma0', 'q'}:
        raise ValueError(f'axes {axis1.name}, {axis2.name} and fixed {sorted(fixed)} must cover '
                         'delta, sigma0 and q exactly once')
    values1, values2 = axis1.grid(), axis2.grid()
    if values1.size * values2.size > MAX_GRID_POINTS:
        raise ValueError(f'grid of {values1.size * values2.size} points exceeds {MAX_GRID_POINTS}')

    params = [{**fixed, axis1.name: float(a), axis2.name: float(b)} for a in values1 for b in values2]
    settings = settings or FeasibilitySettings()
    flat = parallel_map(partial(_evaluate, slab=slab, settings=settings), params, workers)
    reports = [flat[i * values2.size:(i + 1) * values2.size] for i in range(values1.size)]
    logger.info(f'Scanned {len(flat)} points, {sum(r.feasible for r in flat)} feasible')
    return RegionScan(axis1.name, axis2.name, values1, values2, reports, dict(fixed))


def scan_slices(axis1: ParameterAxis, axis2: ParameterAxis, slice_name: Parameter,
                slice_values: List[float], slab: SlabFamily,
                settings: Optional[FeasibilitySettings] = None,
                workers: int = 1) -> Dict[float, RegionScan]:
    """One scan_region per value of the remaining parameter, e.g. a family of q slices."""
    return {
        float(v): scan_region(axis1, axis2, {slice_name: float(v)}, slab, settings, workers)
        for v in slice_values
    }


def write_region_csv(path, scans: Dict[Optional[float], RegionScan]):
    """Write scans as (axis1, axis2, feasible, gamma_star, margin) rows.

    A leading `slice` column is added when there is more than one scan or
    the scans are keyed by a slice value.
    """
    sliced = any(key is not None for key in scans)
    header = ['axis1', 'axis2', 'feasible', 'gamma_star', 'margin']
    if sliced:
        header = ['slice'] + header
    rows = []
    for key, scan in scans.items():
        for i, a in enumerate(scan.values1):
            for j, b in enumerate(scan.values2):
                r = scan.reports[i][j]
                row = [a, b, r.feasible, r.gamma_star, r.margin]
                rows.append([key] + row if sliced else row)
    write_csv(path, header, rows)
