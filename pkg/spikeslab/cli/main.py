import argparse
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError
from termcolor import cprint

from spikeslab.experiments import chain_diagnostics, coverage_experiment
from spikeslab.feasibility import empirical_feasibility, scan_region, scan_slices, write_region_csv
from spikeslab.oracle import enumerate_exact_posterior, exact_marginal_density, exact_marginal_query
from spikeslab.prior import simulate_instance
from spikeslab.samplers import two_stage_sample
from spikeslab.utils import (ConfigError, SpikeSlabError, default_threads, get_logger, is_quiet,
                             set_quiet, write_csv, write_json)
from .config import RunConfig, load_run_config

__all__ = ['EXIT_OK', 'EXIT_USAGE', 'EXIT_CONFIG', 'EXIT_INFEASIBLE', 'EXIT_RUNTIME', 'run_cli', 'main']

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_RUNTIME = 4

# Grid half-width of the oracle tables, in marginal standard deviations
_ORACLE_SPAN = 6.0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f'{self.prog}: error: {message}')


def _say(text: str, color: str = 'cyan'):
    if not is_quiet():
        cprint(text, color, file=sys.stderr)


def _echo(config: RunConfig) -> dict:
    return {'run_config': config.model_dump(mode='json', by_alias=True)}


def _instance(config: RunConfig):
    model = config.require_model()
    theta, instance = simulate_instance(model.linear_model(), config.seed)
    return model, theta, instance


def _feasibility(config: RunConfig, args, workers: int) -> int:
    model, _, instance = _instance(config)
    report = empirical_feasibility(instance.X, instance.noise_std, model.prior, config.feasibility)
    print(report.model_dump_json(indent=4))
    if report.feasible:
        _say(f'Feasible: gamma*={report.gamma_star:.6g} > lambda_max={report.lambda_max:.6g}', 'green')
        return EXIT_OK
    _say(f'Infeasible: best margin {report.margin:.3g} at gamma={report.gamma_best:.6g}', 'red')
    return EXIT_INFEASIBLE


def _region(config: RunConfig, args, workers: int) -> int:
    region = config.region
    if region is None:
        raise ConfigError('region needs a region section')
    slab = region.slab if region.slab is not None else (config.model.slab if config.model else None)
    if slab is None:
        raise ConfigError('region needs region.slab or model.slab')
    if region.slices is not None:
        scans = scan_slices(region.axis1, region.axis2, region.slices.name, region.slices.values,
                            slab, config.feasibility, workers)
    else:
        scans = {None: scan_region(region.axis1, region.axis2, region.fixed, slab,
                                   config.feasibility, workers)}
    write_region_csv(args.out, scans)
    boundaries = {('all' if key is None else repr(key)): scan.boundary() for key, scan in scans.items()}
    write_json(Path(args.out).with_suffix('.json'), {'boundaries': boundaries, **_echo(config)})
    _say(f'Wrote {sum(s.values1.size * s.values2.size for s in scans.values())} grid points to {args.out}')
    return EXIT_OK


def _sample(config: RunConfig, args, workers: int) -> int:
    model, _, instance = _instance(config)
    decomp = config.decomposition.resolve(instance)
    chain = config.sampler.chain_config(config.seed, progress=True)
    samples = two_stage_sample(decomp, model.prior, chain, config.experiment.samples)
    samples.to_csv(args.out, extra=_echo(config))
    _say(f'Wrote {samples.n_samples} draws to {args.out} (acceptance {samples.acceptance_rate:.3f})')
    return EXIT_OK


def _oracle(config: RunConfig, args, workers: int) -> int:
    model, _, instance = _instance(config)
    post = enumerate_exact_posterior(instance, model.prior, workers)
    weights = post.weights
    mean = weights @ post.means
    sd = np.sqrt(np.maximum(weights @ (post.means**2 + post.variances) - mean**2, 0.0))
    oracle = config.oracle
    rows, atoms = [], []
    for i in range(post.d):
        lo = oracle.lo if oracle.lo is not None else min(mean[i] - _ORACLE_SPAN * sd[i], -1.0)
        hi = oracle.hi if oracle.hi is not None else max(mean[i] + _ORACLE_SPAN * sd[i], 1.0)
        t = np.linspace(lo, hi, oracle.points)
        atom, cdf = exact_marginal_query(post, i, t)
        density = exact_marginal_density(post, i, t)
        atoms.append(atom)
        rows.extend((i + 1, a, atom, b, c) for a, b, c in zip(t, cdf, density))
    write_csv(args.out, ['coordinate', 't', 'atom', 'cdf', 'density'], rows)
    write_json(Path(args.out).with_suffix('.json'), {'atoms': atoms, **_echo(config)})
    _say(f'Wrote exact marginals of {post.d} coordinates to {args.out}')
    return EXIT_OK


def _coverage(config: RunConfig, args, workers: int) -> int:
    result = coverage_experiment(config.coverage_setting(), config.experiment.repetitions,
                                 config.seed, workers)
    result.to_csv(args.out, extra=_echo(config))
    _say(f'Coverage {result.aggregate_rate:.4f} over {result.indices.size} repetitions', 'green')
    return EXIT_OK


def _diagnose(config: RunConfig, args, workers: int) -> int:
    model, _, instance = _instance(config)
    diagnose = config.diagnose
    max_lag = args.max_lag if args.max_lag is not None else diagnose.max_lag
    decomp = config.decomposition.resolve(instance)
    chain = config.sampler.chain_config(config.seed, keep_phis=diagnose.chain == 'phi', progress=True)
    samples = two_stage_sample(decomp, model.prior, chain, diagnose.samples)
    states = samples.phis if diagnose.chain == 'phi' else samples.thetas
    bundle = chain_diagnostics(states, args.coordinate - 1, max_lag, samples.acceptance_rate)
    bundle.to_csv(args.out, extra={'chain': diagnose.chain, **_echo(config)})
    _say(f'Coordinate {args.coordinate}: ESS {bundle.ess:.1f} of {bundle.trace.size}')
    return EXIT_OK


_COMMANDS = {
    'feasibility': (_feasibility, 'empirical feasibility of the configured instance (JSON on stdout)'),
    'region': (_region, 'asymptotic feasibility region scan'),
    'sample': (_sample, 'two-stage posterior sampling'),
    'oracle': (_oracle, 'exact marginal CDF tables by enumeration (d <= 20, Gaussian slab)'),
    'coverage': (_coverage, 'repeated-sampling coverage of credible intervals'),
    'diagnose': (_diagnose, 'trace, autocorrelation and ESS of one coordinate'),
}


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument('--seed', type=int, default=argparse.SUPPRESS, help='Master seed (overrides config)')
    common.add_argument('--threads', type=int, default=argparse.SUPPRESS, help='Worker processes')
    common.add_argument('--quiet', action='store_true', default=argparse.SUPPRESS,
                        help='Only log warnings and errors')

    parser = _Parser(prog='spikeslab', description='Spike-and-slab posterior sampling by decomposition',
                     parents=[common])
    sub = parser.add_subparsers(dest='command', required=True, parser_class=_Parser)
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, parents=[common])
        p.add_argument('--config', required=True, help='Config file (JSON/YAML) or shipped setting name')
        if name != 'feasibility':
            p.add_argument('--out', required=True, help='Output CSV file')
        if name == 'diagnose':
            p.add_argument('--coordinate', type=int, required=True, help='Coordinate, 1-based')
            p.add_argument('--max-lag', type=int, default=None, help='Largest lag (overrides config)')
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return the process exit status

    Args:
        argv (list, optional): arguments without the program name; sys.argv[1:] when None

    Returns:
        int: 0 ok, 1 usage error, 2 invalid config, 3 infeasible (feasibility only), 4 runtime error
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    set_quiet(getattr(args, 'quiet', False))
    threads = getattr(args, 'threads', None)
    if threads is not None and threads < 1:
        print(f'spikeslab: error: --threads must be positive, got {threads}', file=sys.stderr)
        return EXIT_USAGE
    if args.command == 'diagnose' and args.coordinate < 1:
        print(f'spikeslab: error: --coordinate is 1-based, got {args.coordinate}', file=sys.stderr)
        return EXIT_USAGE

    handler, _ = _COMMANDS[args.command]
    try:
        workers = threads if threads is not None else default_threads()
        config = load_run_config(args.config, getattr(args, 'seed', None))
        if getattr(args, 'out', None):
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        return handler(config, args, workers)
    except (ConfigError, ValidationError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (SpikeSlabError, ValueError, IndexError, OSError, np.linalg.LinAlgError) as e:
        logger.error(f'{type(e).__name__}: {e}')
        return EXIT_RUNTIME


def main():
    sys.exit(run_cli())
