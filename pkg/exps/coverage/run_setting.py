"""
Run the coverage experiment for one shipped setting.

Usage:
    python run_setting.py --setting gaussian_ar1 --rho 0.3
    python run_setting.py --setting laplace_hmc --method mala --repetitions 200 --threads 8
"""

import argparse
import sys

from common import describe, make_log_dir, prepare_setting

from spikeslab.experiments import coverage_experiment
from spikeslab.utils import SpikeSlabError, default_threads


def run(setting: str, rho=None, method=None, repetitions=None, seed=None, threads=None, log_dir=None):
    config = prepare_setting(setting, rho, method, repetitions, seed)
    rho_value = getattr(config.model.design, 'rho', 0.0)
    log_dir = log_dir or make_log_dir(setting, f'rho{rho_value}', config.sampler.method)
    print(f'🧪 {setting}: {describe(config)}')
    print(f'📁 Results will be saved to: {log_dir}')

    result = coverage_experiment(config.coverage_setting(), config.experiment.repetitions, config.seed,
                                 threads or default_threads())
    summary_file = result.to_csv(log_dir / 'coverage.csv', extra={
        'setting': setting,
        'rho': rho_value,
        'method': config.sampler.method,
        'run_config': config.model_dump(mode='json', by_alias=True),
    })
    print(f'📊 Coverage {result.aggregate_rate:.4f} over {result.indices.size}/{result.repetitions} repetitions')
    return summary_file


def main():
    parser = argparse.ArgumentParser(description='Coverage of two-stage credible intervals for one setting')
    parser.add_argument('--setting', required=True, help='Shipped setting name (e.g., gaussian_ar1)')
    parser.add_argument('--rho', type=float, default=None, help='AR(1) design correlation override')
    parser.add_argument('--method', choices=['mala', 'hmc'], default=None, help='Sampler override')
    parser.add_argument('--repetitions', type=int, default=None, help='Number of repetitions R')
    parser.add_argument('--seed', type=int, default=None, help='Master seed')
    parser.add_argument('--threads', type=int, default=None, help='Worker processes')
    args = parser.parse_args()

    try:
        summary_file = run(args.setting, args.rho, args.method, args.repetitions, args.seed, args.threads)
    except SpikeSlabError as e:
        print(f'❌ Error: {e}')
        sys.exit(1)
    print(f'Summary saved to: {summary_file}')


if __name__ == '__main__':
    main()
