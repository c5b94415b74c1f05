"""
Shared helpers for the coverage experiment scripts.
"""

import sys
from datetime import datetime
from pathlib import Path
from typing import Optional

# Add paths
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from spikeslab.cli import RunConfig
from spikeslab.utils import LOGS, ConfigError, load_setting

RHOS = [0.0, 0.3, 0.6, 0.9]

# Sampler blocks used when a setting is rerun with the other method
METHODS = {
    'mala': {'method': 'mala', 'tau': 0.2},
    'hmc': {'method': 'hmc', 'epsilon': 0.4, 'ell': 10},
}


def prepare_setting(name: str, rho: Optional[float] = None, method: Optional[str] = None,
                    repetitions: Optional[int] = None, seed: Optional[int] = None) -> RunConfig:
    """Load a shipped setting and override the design correlation, sampler or repetition count."""
    data = load_setting(name)
    if data.get('model') is None:
        raise ConfigError(f'setting {name!r} has no model section')
    if rho is not None:
        data['model'] = {**data['model'], 'design': {'kind': 'correlated_gaussian', 'rho': rho}}
    if method is not None:
        sampler = {k: v for k, v in data.get('sampler', {}).items()
                   if k not in ('method', 'tau', 'epsilon', 'ell', 'mass')}
        data['sampler'] = {**sampler, **METHODS[method]}
    if repetitions is not None:
        data['experiment'] = {**data.get('experiment', {}), 'repetitions': repetitions}
    if seed is not None:
        data['seed'] = seed
    return RunConfig.model_validate(data)


def make_log_dir(*parts: str) -> Path:
    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    log_dir = LOGS / 'coverage' / f"{'_'.join(parts)}_{timestamp}"
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir


def describe(config: RunConfig) -> str:
    model = config.model
    rho = getattr(model.design, 'rho', 0.0)
    return f'n={model.n} d={model.d} q={model.q} slab={model.slab.kind} rho={rho} method={config.sampler.method}'
