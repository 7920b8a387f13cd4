"""Focal-plane scans: efficiency maps, pump focus scans and optimal focus curves."""

import logging

from spdcfocus.commands import filter_detuning
from spdcfocus.services import analysis

logger = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser('map', parents=[common],
                                   help='coupling efficiency over signal and idler focal shifts')
    parser.set_defaults(handler=efficiency_map)

    parser = subparsers.add_parser('focus-scan', parents=[common],
                                   help='coupling efficiency against the pump focal shift')
    parser.set_defaults(handler=focus_scan)

    parser = subparsers.add_parser('optimize', parents=[common],
                                   help='optimal z_s = z_i against the pump focal shift')
    parser.add_argument('--objective', choices=('brightness', 'fixed'),
                        help='maximise spectral brightness or |C|^2 at the filter wavelength')
    parser.set_defaults(handler=optimal_focus)


def efficiency_map(run_config, args):
    """Rows of (z_s, z_i, value) over the [axis.z_s] × [axis.z_i] grid."""
    result = analysis.efficiency_map(
        run_config.setup,
        run_config.axis('z_s').values,
        run_config.axis('z_i').values,
        run_config.signal_mode, run_config.idler_mode,
        detuning=filter_detuning(run_config),
        normalize=run_config.normalize == 'max',
        workers=args.threads,
    )
    z_s_best, z_i_best = result.peak.location
    logger.info('Map maximum %.6g at z_s=%.4g mm, z_i=%.4g mm', result.raw_max,
                z_s_best * 1e3, z_i_best * 1e3)
    rows = [
        (float(z_s), float(z_i), float(result.values[row, col]))
        for row, z_s in enumerate(result.z_s)
        for col, z_i in enumerate(result.z_i)
    ]
    return ['z_s_m', 'z_i_m', 'value'], rows


def focus_scan(run_config, args):
    result = analysis.pump_focus_scan(
        run_config.setup, run_config.axis('z_p').values,
        run_config.signal_mode, run_config.idler_mode,
        detuning=filter_detuning(run_config), workers=args.threads,
    )
    values = result.values if run_config.normalize == 'max' else result.raw
    rows = [(float(z_p), float(value), float(raw), result.fwhm)
            for z_p, value, raw in zip(result.z_p, values, result.raw)]
    return ['z_p_m', 'value', 'raw', 'fwhm_m'], rows


def optimal_focus(run_config, args):
    """z_s^max for each pump shift, with the straight-line fit repeated per row."""
    scan = run_config.scan
    curve = analysis.optimal_signal_focus(
        run_config.setup, run_config.axis('z_p').values,
        run_config.signal_mode, run_config.idler_mode,
        objective=scan.objective, detuning=filter_detuning(run_config),
        shift_range=scan.shift_range, shift_points=scan.shift_points,
        band=scan.band, band_points=scan.points, workers=args.threads,
    )
    fit = curve.fit
    values = curve.values if run_config.normalize == 'max' else curve.raw
    rows = [
        (float(z_p), float(z_s), float(value), float(raw), status,
         fit.slope, fit.intercept, fit.r_squared)
        for z_p, z_s, value, raw, status in zip(curve.z_p, curve.z_s_max, values,
                                                curve.raw, curve.statuses)
    ]
    columns = ['z_p_m', 'z_s_max_m', 'value', 'raw', 'status',
               'fit_slope', 'fit_intercept_m', 'fit_r_squared']
    return columns, rows
