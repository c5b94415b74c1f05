"""
Scan the asymptotic feasibility region for the shipped region settings.

Usage:
    python run_region_slices.py
    python run_region_slices.py --settings region_gaussian --threads 8
"""

import argparse
import sys
from datetime import datetime
from pathlib import Path

# Add paths
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from spikeslab.cli import load_run_config
from spikeslab.feasibility import scan_slices, write_region_csv
from spikeslab.utils import LOGS, default_threads, write_json

SETTINGS = ['region_gaussian', 'region_laplace']


def main():
    parser = argparse.ArgumentParser(description='Asymptotic feasibility region scans')
    parser.add_argument('--settings', nargs='+', default=SETTINGS, help='Shipped region settings')
    parser.add_argument('--threads', type=int, default=None, help='Worker processes')
    args = parser.parse_args()

    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    log_dir = LOGS / 'region' / timestamp
    log_dir.mkdir(parents=True, exist_ok=True)
    workers = args.threads or default_threads()

    for name in args.settings:
        config = load_run_config(name)
        region = config.region
        print(f'🗺️  {name}: {region.axis1.name} x {region.axis2.name}, slices over {region.slices.name}')
        scans = scan_slices(region.axis1, region.axis2, region.slices.name, region.slices.values,
                            region.slab, config.feasibility, workers)
        write_region_csv(log_dir / f'{name}.csv', scans)
        boundaries = {repr(key): scan.boundary() for key, scan in scans.items()}
        write_json(log_dir / f'{name}.json', {'boundaries': boundaries})
        for key, scan in scans.items():
            share = sum(r.feasible for row in scan.reports for r in row) / (scan.values1.size * scan.values2.size)
            print(f'  {region.slices.name}={key:<5} feasible share {share:.2f}')

    print(f'✅ Results saved to: {log_dir}')


if __name__ == '__main__':
    main()
