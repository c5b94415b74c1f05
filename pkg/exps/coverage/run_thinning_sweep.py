"""
Coverage as a function of the thinning interval g, with burn-in g * B.

Usage:
    python run_thinning_sweep.py --setting infeasible --thinnings 1 2 3 4 5 6 7 8 9 10
"""

import argparse

from common import RHOS, make_log_dir, prepare_setting

from spikeslab.experiments import thinning_sweep
from spikeslab.utils import default_threads, write_json


def main():
    parser = argparse.ArgumentParser(description='Coverage against thinning interval and burn-in')
    parser.add_argument('--setting', default='infeasible', help='Shipped setting name')
    parser.add_argument('--rhos', nargs='+', type=float, default=RHOS, help='AR(1) correlations')
    parser.add_argument('--thinnings', nargs='+', type=int, default=None,
                        help='Thinning intervals (default: the setting\'s experiment.thinnings)')
    parser.add_argument('--repetitions', type=int, default=None, help='Repetitions per point')
    parser.add_argument('--threads', type=int, default=None, help='Worker processes')
    args = parser.parse_args()

    log_dir = make_log_dir('thinning', args.setting)
    print(f'📁 Results will be saved to: {log_dir}')
    table = []
    for rho in args.rhos:
        config = prepare_setting(args.setting, rho, repetitions=args.repetitions)
        thinnings = args.thinnings or config.experiment.thinnings
        results = thinning_sweep(config.coverage_setting(), thinnings, config.experiment.repetitions,
                                 config.seed, workers=args.threads or default_threads())
        for g, result in results.items():
            result.to_csv(log_dir / f'rho{rho}_g{g}.csv', extra={'rho': rho, 'thinning': g})
            table.append({'rho': rho, 'thinning': g, 'coverage': result.aggregate_rate,
                          'successful': int(result.indices.size)})
            print(f'  rho={rho:<4} g={g:<3} coverage={result.aggregate_rate:.4f}')

    write_json(log_dir / 'summary.json', {'setting': args.setting, 'points': table})
    print(f'✅ Summary saved to: {log_dir / "summary.json"}')


if __name__ == '__main__':
    main()
