import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = ['format_value', 'write_csv', 'write_json']


def format_value(value) -> str:
    """Render a CSV cell; floats use the shortest round-trip representation."""
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ''
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    """Write rows to a comma separated file with a header line

    Args:
        path (str | Path): destination file, parent directories are created
        header (Sequence[str]): column names
        rows (Iterable[Sequence]): one sequence of cells per line
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='\n') as file:
        file.write(','.join(header) + '\n')
        for row in rows:
            file.write(','.join(format_value(v) for v in row) + '\n')


def write_json(path, data: dict):
    """Write a JSON document with sorted keys and 4-space indentation"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as file:
        json.dump(data, file, indent=4, sort_keys=True)
        file.write('\n')
