"""Spectral subcommands: filter-wavelength response, brightness and phase-matching constants."""

import logging
from functools import partial

import numpy as np

from spdcfocus.services import analysis
from spdcfocus.services.sweep import run_sweep

logger = logging.getLogger(__name__)

WAVES = ('p', 's', 'i')


def register(subparsers, common):
    parser = subparsers.add_parser('spectrum', parents=[common],
                                   help='coupling efficiency against the signal filter wavelength')
    parser.set_defaults(handler=spectrum)

    parser = subparsers.add_parser('brightness', parents=[common],
                                   help='spectral brightness, optionally over z_s = z_i')
    parser.set_defaults(handler=brightness)

    parser = subparsers.add_parser('qpm', parents=[common],
                                   help='optical constants and the quasi-phase-matching period')
    parser.set_defaults(handler=phase_matching)


def spectrum(run_config, args):
    result = analysis.spectral_response(run_config.setup, run_config.axis('lambda_s').values,
                                        run_config.signal_mode, run_config.idler_mode)
    if result.fwhm is None:
        logger.warning('Spectral FWHM undefined inside the scanned band')
    logger.info('Spectral peak at %.6f nm', result.peak_wavelength * 1e9)
    values = result.values if run_config.normalize == 'max' else result.raw
    rows = [(float(wavelength), float(value), float(raw))
            for wavelength, value, raw in zip(result.wavelengths, values, result.raw)]
    return ['lambda_s_m', 'value', 'raw'], rows


def _brightness_at_shift(setup, signal_mode, idler_mode, band, points, z_si):
    shifted = setup if z_si is None else setup.with_shifts(z_s=z_si, z_i=z_si)
    return analysis.spectral_brightness(shifted, signal_mode, idler_mode, band, points)


def brightness(run_config, args):
    """One row at the configured shifts, or one row per ``[axis.z_si]`` value."""
    setup = run_config.setup
    shifts = list(run_config.axes['z_si'].values) if 'z_si' in run_config.axes else [None]
    func = partial(_brightness_at_shift, setup, run_config.signal_mode, run_config.idler_mode,
                   run_config.scan.band, run_config.scan.points)
    peaks = run_sweep(func, shifts, args.threads, label='spectral brightness')

    raw = np.array([peak.value for peak in peaks])
    reference = float(np.max(raw)) if run_config.normalize == 'max' else 1.0
    if reference <= 0:
        reference = 1.0
    rows = []
    for z_si, peak in zip(shifts, peaks):
        z_s = setup.signal.focal_shift if z_si is None else float(z_si)
        z_i = setup.idler.focal_shift if z_si is None else float(z_si)
        rows.append((setup.pump.focal_shift, z_s, z_i, peak.value / reference, peak.value,
                     peak.wavelength, peak.status))
    columns = ['z_p_m', 'z_s_m', 'z_i_m', 'value', 'brightness', 'peak_wavelength_m', 'status']
    return columns, rows


def phase_matching(run_config, args):
    setup = run_config.setup
    columns, row = [], []
    for wave, constants in zip(WAVES, setup.constants):
        columns += [f'lambda_{wave}_m', f'n_{wave}', f'group_index_{wave}', f'k_{wave}_per_m',
                    f'inv_u_{wave}_s_per_m', f'G_{wave}_s2_per_m']
        row += [constants.wavelength, constants.n, constants.group_index, constants.k,
                constants.inv_u, constants.G]
    columns += ['poling_period_m', 'residual_mismatch_per_m']
    row += [float(setup.poling_period), float(setup.residual_mismatch)]
    logger.info('Poling period %.6g um', setup.poling_period * 1e6)
    return columns, [tuple(row)]
