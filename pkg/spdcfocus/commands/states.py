"""Two-photon state subcommands: LG mode tables, spectral purity and the oracle cross-check."""

import logging
from functools import partial

import numpy as np

from spdcfocus.commands import filter_detuning
from spdcfocus.exceptions import ConfigError
from spdcfocus.models import FGM
from spdcfocus.services import analysis
from spdcfocus.services.amplitude import amplitude_block
from spdcfocus.services.modes import mode_block
from spdcfocus.services.oracle import brute_force_amplitude
from spdcfocus.services.sweep import run_sweep

logger = logging.getLogger(__name__)

SCENARIOS = ('centred', 'pump-shifted', 'all-shifted', 'locked-optimum')


def register(subparsers, common):
    parser = subparsers.add_parser('modes', parents=[common],
                                   help='LG mode distribution of the photon pairs')
    parser.add_argument('--scenarios', action='store_true',
                        help='tabulate the four focal arrangements for [scan] scenario_shift')
    parser.set_defaults(handler=modes)

    parser = subparsers.add_parser('purity', parents=[common],
                                   help='single-mode-fibre spectral purity over (z_p, z_s = z_i)')
    parser.set_defaults(handler=purity)

    parser = subparsers.add_parser('oracle-check', parents=[common],
                                   help='closed form against brute-force quadrature on a mode block')
    parser.set_defaults(handler=oracle_check)


def _scenario_setups(run_config, detuning):
    z_p = run_config.scan.scenario_shift
    if z_p is None:
        raise ConfigError('--scenarios needs [scan] scenario_shift', run_config.path)
    setup = run_config.setup
    scan = run_config.scan
    optimum = analysis.best_locked_shift(
        setup, z_p, objective='fixed', detuning=detuning,
        shift_range=scan.shift_range, shift_points=scan.shift_points,
    )
    z_opt = optimum.location[0]
    logger.info('Locked optimum z_s = z_i = %.4g mm for z_p = %.4g mm', z_opt * 1e3, z_p * 1e3)
    return [
        setup.with_shifts(z_p=0.0, z_s=0.0, z_i=0.0),
        setup.with_shifts(z_p=z_p, z_s=0.0, z_i=0.0),
        setup.with_shifts(z_p=z_p, z_s=z_p, z_i=z_p),
        setup.with_shifts(z_p=z_p, z_s=z_opt, z_i=z_opt),
    ]


def _table_rows(table, normalize, label=None):
    values = table.values if normalize == 'max' else table.raw
    prefix = () if label is None else (label,)
    rows = []
    for a, signal_mode in enumerate(table.signal_modes):
        for b, idler_mode in enumerate(table.idler_modes):
            rows.append(prefix + (signal_mode.p, signal_mode.l, idler_mode.p, idler_mode.l,
                                  float(values[a, b]), float(table.raw[a, b])))
    return rows


def modes(run_config, args):
    detuning = filter_detuning(run_config)
    columns = ['p_s', 'l_s', 'p_i', 'l_i', 'value', 'raw']
    if not args.scenarios:
        table = analysis.mode_distribution(run_config.setup, run_config.max_p, run_config.max_l,
                                           detuning)
        return columns, _table_rows(table, run_config.normalize)

    tables = analysis.mode_distributions(_scenario_setups(run_config, detuning),
                                         run_config.max_p, run_config.max_l, detuning)
    rows = []
    for label, table in zip(SCENARIOS, tables):
        rows += _table_rows(table, run_config.normalize, label)
    return ['scenario'] + columns, rows


def purity(run_config, args):
    """Fibre-filtered purity trace over (z_p, z_s = z_i), with the Schmidt ratio per cell."""
    result = analysis.purity_map(run_config.setup, run_config.axis('z_p').values,
                                 run_config.axis('z_si').values,
                                 points=run_config.scan.jsa_points, span=run_config.scan.jsa_span,
                                 workers=args.threads)
    row, col = np.unravel_index(int(np.argmax(result.raw)), result.raw.shape)
    logger.info('Purity maximum %.6g at z_p=%.4g mm, z_s=z_i=%.4g mm', result.raw[row, col],
                result.z_p[row] * 1e3, result.z_si[col] * 1e3)
    values = result.values if run_config.normalize == 'max' else result.raw
    rows = [(float(z_p), float(z_si), float(values[a, b]), float(result.raw[a, b]),
             float(result.schmidt[a, b]))
            for a, z_p in enumerate(result.z_p) for b, z_si in enumerate(result.z_si)]
    return ['z_p_m', 'z_si_m', 'purity', 'raw', 'schmidt_purity'], rows


def _oracle_probability(setup, detuning, grid, pair):
    signal_mode, idler_mode = pair
    return abs(brute_force_amplitude(setup, signal_mode, idler_mode, detuning, grid)) ** 2


def oracle_check(run_config, args):
    """|C|² of every block pair from both methods, each normalised by (0,0|0,0).

    The deviation column is |closed − oracle| / max(closed, 1e−3).
    """
    setup = run_config.setup
    detuning = filter_detuning(run_config)
    block = mode_block(run_config.max_p, run_config.max_l)
    closed = np.abs(amplitude_block(setup, block, block, detuning)) ** 2

    pairs = [(s, i) for s in block for i in block]
    func = partial(_oracle_probability, setup, detuning, run_config.oracle)
    oracle = np.array(run_sweep(func, pairs, args.threads, label='oracle check'))
    oracle = oracle.reshape(len(block), len(block))

    origin = block.index(FGM)
    closed = closed / closed[origin, origin]
    oracle = oracle / oracle[origin, origin]
    deviation = np.abs(closed - oracle) / np.maximum(closed, 1e-3)
    logger.info('Largest closed-form/oracle deviation %.3g over %d pairs', float(np.max(deviation)),
                len(pairs))

    rows = []
    for a, signal_mode in enumerate(block):
        for b, idler_mode in enumerate(block):
            rows.append((signal_mode.p, signal_mode.l, idler_mode.p, idler_mode.l,
                         float(closed[a, b]), float(oracle[a, b]), float(deviation[a, b])))
    return ['p_s', 'l_s', 'p_i', 'l_i', 'closed_form', 'oracle', 'deviation'], rows
