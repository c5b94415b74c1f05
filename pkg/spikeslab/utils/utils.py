import json
import os
from pathlib import Path

import yaml
from dotenv import load_dotenv
load_dotenv()

from .errors import ConfigError

__all__ = ['BENCHMARK', 'LOGS', 'default_threads', 'load_setting', 'read_document']

# Set environment variables for the benchmark and output directories
_ROOT = Path(__file__).resolve().parents[2]
BENCHMARK = Path(os.environ.get('SPIKESLAB_BENCHMARK', _ROOT / 'benchmark'))
LOGS = Path(os.environ.get('SPIKESLAB_LOGS', _ROOT / 'logs'))


def default_threads() -> int:
    """Worker count used when the caller does not pass one explicitly.

    Returns:
        int: value of SPIKESLAB_THREADS, or 1 when unset
    """
    value = os.environ.get('SPIKESLAB_THREADS', '1')
    try:
        return max(1, int(value))
    except ValueError:
        raise ConfigError(f'SPIKESLAB_THREADS must be an integer, got {value!r}')


def read_document(path) -> dict:
    """Read a JSON or YAML document into a dictionary

    Args:
        path (str | Path): file to read; .yaml and .yml are parsed as YAML

    Returns:
        dict: the parsed document
    """
    path = Path(path)
    with open(path, 'r') as file:
        text = file.read()
    try:
        if path.suffix in ('.yaml', '.yml'):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f'{path}: {e}') from e
    if not isinstance(data, dict):
        raise ConfigError(f'{path}: top level must be a mapping')
    return data


def load_setting(name: str) -> dict:
    """Load one of the shipped benchmark settings

    Args:
        name (str): setting name, e.g. toy or gaussian_ar1

    Returns:
        dict: the raw configuration document
    """
    for suffix in ('.json', '.yaml', '.yml'):
        path = BENCHMARK / 'configs' / f'{name}{suffix}'
        if path.exists():
            return read_document(path)
    raise ConfigError(f'unknown setting {name!r} (looked in {BENCHMARK / "configs"})')
