"""
Run the coverage experiment over every setting, design correlation and sampler.

Usage:
    python run_all_settings.py --threads 16
    python run_all_settings.py --settings gaussian_ar1 --rhos 0 0.9 --repetitions 100
"""

import argparse
from datetime import datetime

from common import LOGS, METHODS, RHOS
from run_setting import run

from spikeslab.utils import SpikeSlabError, write_json

SETTINGS = ['gaussian_ar1', 'laplace_hmc']


def main():
    parser = argparse.ArgumentParser(description='Coverage experiment over all settings')
    parser.add_argument('--settings', nargs='+', default=SETTINGS, help='Shipped setting names')
    parser.add_argument('--rhos', nargs='+', type=float, default=RHOS, help='AR(1) correlations')
    parser.add_argument('--methods', nargs='+', choices=list(METHODS), default=list(METHODS),
                        help='Samplers')
    parser.add_argument('--repetitions', type=int, default=None, help='Repetitions per run')
    parser.add_argument('--threads', type=int, default=None, help='Worker processes')
    args = parser.parse_args()

    timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
    root = LOGS / 'coverage' / f'all_{timestamp}'
    runs = []
    for setting in args.settings:
        for rho in args.rhos:
            for method in args.methods:
                log_dir = root / f'{setting}_rho{rho}_{method}'
                log_dir.mkdir(parents=True, exist_ok=True)
                try:
                    summary = run(setting, rho, method, args.repetitions, threads=args.threads,
                                  log_dir=log_dir)
                    runs.append({'setting': setting, 'rho': rho, 'method': method, 'summary': str(summary)})
                except SpikeSlabError as e:
                    print(f'⚠️  {setting} rho={rho} {method} failed: {e}')
                    runs.append({'setting': setting, 'rho': rho, 'method': method, 'error': str(e)})

    write_json(root / 'index.json', {'timestamp': timestamp, 'runs': runs})
    print(f"\n{'=' * 80}")
    print(f'✅ {sum("summary" in r for r in runs)}/{len(runs)} runs finished, index at {root / "index.json"}')


if __name__ == '__main__':
    main()
