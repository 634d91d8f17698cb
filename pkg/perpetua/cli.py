"""Command line runner: ``perpetua run <config.json>``.

One config in, one report out. The report directory gets ``report.json``
plus the CSV files of the mode. Exit codes: 0 for a completed run whatever
the verdicts, 2 for a config or validation error, 3 for a numeric failure
or an unwritable output directory.
"""

import argparse
import csv
import math
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional

import daiquiri
import daiquiri.formatter
import daiquiri.output
import numpy as np

from . import __version__
from .branching import (
    biggins_W, check_lp_criterion, check_spine_identity, check_ui_criterion,
    martingale_trace, population_rows, simulate_population, simulate_spine,
    validate_branching, verify_many_to_one,
)
from .config import RunConfig, dump_config, load_config
from .exceptions import NumericError, ValidationError
from .exponents import LevyTriplet, critical_moment
from .measures import validate_standing_assumptions
from .perpetuity import (
    check_as_finiteness, check_moment_finiteness, default_hill_k, embedding_moment,
    estimate_abs_moment, hill_tail_index, simulate_perpetuity,
)
from .rng import draw_master_seed, resolve_threads
from .sampler import path_rows, sample_path, small_jump_bias
from .utils import BaseResult, flatten_errors, format_float

logger = daiquiri.getLogger(__name__)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

Table = List[list]


class RunReport(NamedTuple):
    """Outcome of one run. ``wall_clock`` is logged, never written, so the
    report files depend only on the config and the seed."""
    config: RunConfig
    results: Dict[str, Any]
    tables: Dict[str, Table]
    wall_clock: float

    def document(self) -> dict:
        return {
            'schema_version': SCHEMA_VERSION,
            'version': __version__,
            'mode': self.config.mode,
            'seed': self.config.seed,
            'config': dump_config(self.config),
            'results': self.results,
            'artifacts': sorted(self.tables),
        }


# modes

def _validate(config: RunConfig):
    model = config.model
    if isinstance(model, LevyTriplet):
        report = validate_standing_assumptions(model.marginal_x, model.marginal_y, config.tolerance)
    else:
        report = validate_branching(model)
    return {'validation': report.as_dict()}, {}


def _criteria_perpetuity(config: RunConfig):
    t, p, tol = config.model, config.p, config.tolerance
    results = {
        'as_finiteness': check_as_finiteness(t, tol).as_dict(),
        'moment_finiteness': check_moment_finiteness(t, p, tol).as_dict(),
    }
    try:
        results['critical_moment'] = critical_moment(t, max(2 * p, 4.0), quad_tol=tol)
    except NumericError as e:
        logger.warning('critical moment not available: %s', e)
        results['critical_moment'] = None
    if t.marginal_x.is_atomic:
        results['embedding_moment'] = embedding_moment(t, p)
    return results, {}


def _sampler_context(config: RunConfig, tables: Dict[str, Table]) -> dict:
    t = config.model
    if config.write_paths:
        horizon = config.T if config.T else 1.0
        path = sample_path(t, horizon, config.eps, seed=config.seed)
        tables[f'paths/path_{config.seed}.csv'] = path_rows(path)
    return small_jump_bias(t, config.eps).as_dict()


def _simulate_perpetuity(config: RunConfig):
    tables = {}
    batch = simulate_perpetuity(
        config.model, config.n_samples, config.n_iter, config.eps, config.seed, config.threads)
    tables['samples.csv'] = [['index', 'value']] + [[i, v] for i, v in enumerate(batch.values)]
    results = {
        'n_samples': config.n_samples,
        'n_overflow': batch.n_overflow,
        'mean_iterations': float(batch.iterations.mean()) if batch.iterations.size else math.nan,
        'mean': float(batch.values.mean()) if batch.values.size else math.nan,
        'median': float(np.median(batch.values)) if batch.values.size else math.nan,
    }
    k = default_hill_k(batch.values.size)
    try:
        results['hill_k'] = k
        results['hill_tail_index'] = hill_tail_index(batch.values, k)
    except (ValidationError, NumericError) as e:
        logger.warning('hill estimator skipped: %s', e)
        results['hill_tail_index'] = None
    results['small_jump_bias'] = _sampler_context(config, tables)
    return results, tables


def _estimate_moment(config: RunConfig):
    tables = {}
    estimate = estimate_abs_moment(
        config.model, config.p, config.n_samples, config.n_iter,
        config.eps, config.seed, config.threads)
    tables['moments.csv'] = [
        ['p', 'n_samples', 'n_iter', 'estimate', 'std_error', 'stable_flag'],
        [estimate.p, estimate.n_samples,
         'adaptive' if estimate.n_iter is None else estimate.n_iter,
         estimate.estimate, estimate.std_error, int(estimate.stable)],
    ]
    results = {
        'moment': estimate.as_dict(),
        'moment_finiteness': check_moment_finiteness(config.model, config.p, config.tolerance).as_dict(),
        'small_jump_bias': _sampler_context(config, tables),
    }
    return results, tables


def _criteria_branching(config: RunConfig):
    c, tol = config.model, config.tolerance
    p = config.p if config.p is not None else 2.0
    return {
        'branching_assumptions': validate_branching(c).as_dict(),
        'uniform_integrability': check_ui_criterion(c, tol).as_dict(),
        'lp_convergence': check_lp_criterion(c, p, tol).as_dict(),
    }, {}


def _simulate_branching(config: RunConfig):
    c, T = config.model, config.T
    tree = simulate_population(
        c, T, config.max_particles, config.seed, config.times or (), config.prune_below)
    results = {
        'horizon': T,
        'population_size': len(tree.alive(T)),
        'particles_created': len(tree.particles),
        'W_T': biggins_W(tree, T),
        'truncated': tree.truncated,
        'pruned_mass': tree.pruned_mass.get(float(T), 0.0),
    }
    return results, {'population.csv': population_rows(tree, T)}


def _verify_martingale(config: RunConfig):
    c = config.model
    trace = martingale_trace(
        c, config.times, config.n_samples, config.seed, config.max_particles,
        config.prune_below, config.threads)
    results = {'martingale_trace': trace._asdict()}
    if config.z is not None:
        check = verify_many_to_one(
            c, config.z, max(config.times), config.n_samples, config.seed,
            config.max_particles, config.threads)
        results['many_to_one'] = check.as_dict()
    return results, {'martingale_trace.csv': [['t', 'W_t']] + [list(r) for r in trace.rows()]}


def _spine(config: RunConfig):
    c, T = config.model, config.T
    spine = simulate_spine(c, T, config.seed)
    results = {
        'horizon': T,
        'n_events': len(spine.events),
        'final_position': spine.final_position,
        'S': spine.S,
        'w_star': spine.w_star,
    }
    if config.n_samples is not None:
        results['spine_identity'] = check_spine_identity(
            c, T, config.n_samples, config.seed, config.max_particles, config.threads).as_dict()
    return results, {}


MODES = {
    'validate': _validate,
    'criteria-perpetuity': _criteria_perpetuity,
    'simulate-perpetuity': _simulate_perpetuity,
    'estimate-moment': _estimate_moment,
    'criteria-branching': _criteria_branching,
    'simulate-branching': _simulate_branching,
    'verify-martingale': _verify_martingale,
    'spine': _spine,
}


def run(config: RunConfig) -> RunReport:
    """Dispatch `config` to its mode. A missing seed is drawn and recorded
    in the echoed config.

    :raises ValidationError: On an unknown mode or invalid argument.
    :raises NumericError: When a computation leaves the numeric policy.
    """
    if config.mode not in MODES:
        raise ValidationError(f'Unknown mode {config.mode!r}.')
    if config.seed is None:
        config = config._replace(seed=draw_master_seed())
    config = config._replace(threads=resolve_threads(config.threads))

    logger.info('run %s with seed %d on %d thread(s)', config.mode, config.seed, config.threads)
    start = time.perf_counter()
    results, tables = MODES[config.mode](config)
    wall_clock = time.perf_counter() - start
    logger.info('run %s finished in %.3f s', config.mode, wall_clock)
    return RunReport(config, results, tables, wall_clock)


# output

def _render(value: Any, indent: str = '') -> str:
    """Deterministic JSON: insertion key order, 17 significant digits and
    non-finite floats as strings."""
    inner = indent + '  '
    if isinstance(value, Mapping):
        if not value:
            return '{}'
        items = [f'{inner}{_render(str(k))}: {_render(v, inner)}' for k, v in value.items()]
        return '{\n' + ',\n'.join(items) + '\n' + indent + '}'
    if isinstance(value, (list, tuple)):
        if not value:
            return '[]'
        items = [inner + _render(v, inner) for v in value]
        return '[\n' + ',\n'.join(items) + '\n' + indent + ']'
    if value is None:
        return 'null'
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        text = format_float(value)
        return text if math.isfinite(value) else f'"{text}"'
    if isinstance(value, str):
        return '"' + value.replace('\\', '\\\\').replace('"', '\\"').replace('\n', '\\n') + '"'
    raise TypeError(f'Cannot render {value!r} in a report.')


def _cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def emit_report(report: RunReport, directory) -> List[Path]:
    """Write ``report.json`` and the mode tables under `directory`.

    :raises OSError: If the directory is not writable.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(report.tables):
        filename = directory / name
        filename.parent.mkdir(parents=True, exist_ok=True)
        with open(filename, 'w', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            for row in report.tables[name]:
                writer.writerow([_cell(v) for v in row])
        written.append(filename)
    filename = directory / 'report.json'
    filename.write_text(_render(report.document()) + '\n')
    written.append(filename)
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='perpetua',
        description='Criteria and simulation for Lévy-type perpetuities and branching Lévy processes.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)
    run_parser = commands.add_parser('run', help='run one experiment config')
    run_parser.add_argument('config', help='path of the JSON config')
    run_parser.add_argument('--output-dir', '-o', help='report directory (overrides the config)')
    run_parser.add_argument('--seed', '-s', type=int, help='master seed (overrides the config)')
    run_parser.add_argument(
        '--threads', '-t', type=int,
        help='worker threads (overrides the config, falls back to $LPL_THREADS)')
    run_parser.add_argument(
        '-v', '--verbose', action='count', default=0, help='increase output verbosity')
    run_parser.add_argument(
        '--log-level', choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'), help='set the log level')
    return parser


def _log_level(args) -> str:
    if args.log_level:
        return args.log_level
    return ('WARNING', 'INFO', 'DEBUG')[min(args.verbose, 2)]


def main(args: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(args)
    log_output = daiquiri.output.Stream(
        sys.stderr,
        formatter=daiquiri.formatter.ColorFormatter(fmt='[%(levelname)s] %(message)s'),
    )
    daiquiri.setup(level=_log_level(args), outputs=[log_output])

    try:
        config = load_config(args.config)
        overrides = {
            'seed': args.seed,
            'threads': args.threads,
            'output_dir': args.output_dir,
        }
        config = config._replace(**{k: v for k, v in overrides.items() if v is not None})
        report = run(config)
    except ValidationError as e:
        detail = e.detail if isinstance(e.detail, BaseResult) else e.msg
        for path, message in flatten_errors(detail):
            logger.error('%s: %s', path, message)
        return EXIT_CONFIG
    except NumericError as e:
        logger.error('numeric failure: %s', e)
        return EXIT_NUMERIC
    except Exception:
        logger.exception('run failed')
        return EXIT_NUMERIC

    try:
        for filename in emit_report(report, report.config.output_dir or '.'):
            logger.info('wrote %s', filename)
    except OSError as e:
        logger.error('cannot write the report: %s', e)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
