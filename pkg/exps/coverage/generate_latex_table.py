"""
Generate a LaTeX table from coverage experiment results.

Usage:
    python generate_latex_table.py --log_dir logs/coverage/all_TIMESTAMP

Or merge several directories:
    python generate_latex_table.py --log_dirs logs/coverage/dir1 logs/coverage/dir2
"""

import argparse
import json
from collections import defaultdict
from pathlib import Path
from typing import Dict, List


def load_results_from_directory(log_dir: Path) -> List[Dict]:
    """Load every coverage summary (coverage.json) below a log directory."""
    results = []
    for summary_file in log_dir.rglob('coverage.json'):
        try:
            results.append(json.loads(summary_file.read_text()))
        except (OSError, json.JSONDecodeError) as e:
            print(f'Warning: Failed to load {summary_file}: {e}')
    return results


def collect(results: List[Dict]) -> Dict:
    """Coverage keyed by (setting, method) and then rho."""
    table = defaultdict(dict)
    for r in results:
        if r.get('setting') is None:
            continue
        table[(r['setting'], r['method'])][r['rho']] = (r['aggregate_rate'], r['successful'])
    return table


def generate_latex_table(table: Dict) -> str:
    rhos = sorted({rho for row in table.values() for rho in row})
    lines = [
        '\\begin{tabular}{ll|' + 'c' * len(rhos) + '}',
        '\\hline',
        'Setting & Sampler & ' + ' & '.join(f'$\\rho={rho:g}$' for rho in rhos) + ' \\\\',
        '\\hline',
    ]
    for (setting, method), row in sorted(table.items()):
        cells = [f'{row[rho][0]:.3f}' if rho in row else '--' for rho in rhos]
        name = setting.replace('_', '\\_')
        lines.append(f'{name} & {method.upper()} & ' + ' & '.join(cells) + ' \\\\')
    lines.extend(['\\hline', '\\end{tabular}'])
    return '\n'.join(lines)


def main():
    parser = argparse.ArgumentParser(description='LaTeX table of empirical coverage rates')
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--log_dir', type=Path, help='Log directory')
    group.add_argument('--log_dirs', type=Path, nargs='+', help='Several log directories to merge')
    parser.add_argument('--output', type=Path, default=None, help='Write the table here instead of stdout')
    args = parser.parse_args()

    results = []
    for log_dir in (args.log_dirs or [args.log_dir]):
        results.extend(load_results_from_directory(log_dir))
    if not results:
        print('No coverage.json files found')
        return
    latex = generate_latex_table(collect(results))
    if args.output:
        args.output.write_text(latex + '\n')
        print(f'Table saved to: {args.output}')
    else:
        print(latex)


if __name__ == '__main__':
    main()
