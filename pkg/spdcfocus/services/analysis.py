"""Derived quantities: efficiency maps, focus scans, spectra, brightness and purity."""

import logging
import math
from functools import partial

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.optimize import minimize

from spdcfocus import get_settings
from spdcfocus.exceptions import ConfigError, UndefinedPurityError
from spdcfocus.models import (
    FGM, DetuningPair, EfficiencyMap, FocusCurve, FocusScan, JsaGrid, ModeTable,
    OptimumPoint, PurityMap, ScenarioReport, SpectralPeak, SpectralResponse,
)
from spdcfocus.services.amplitude import (
    amplitude_block, amplitude_tensor, coupling_probability, overlap_amplitudes,
)
from spdcfocus.services.modes import mode_block
from spdcfocus.services.optimize import (
    half_max_width, linear_fit, quadratic_offset, refine_maximum,
)
from spdcfocus.services.sweep import run_sweep

logger = logging.getLogger(__name__)

DEFAULT_BAND = (800e-9, 820e-9)
DEFAULT_BAND_POINTS = 201
DEFAULT_SHIFT_RANGE = (-10e-3, 10e-3)
DEFAULT_SHIFT_POINTS = 41
MIN_JSA_SPAN = 4.0
MIN_POINTS_PER_HALF_WIDTH = 8


def _normalize(values):
    peak = float(np.max(values)) if np.size(values) else 0.0
    if peak <= 0:
        return np.zeros_like(values, dtype=float), peak
    return np.asarray(values, dtype=float) / peak, peak


def signal_detunings(setup, wavelengths):
    """Signal angular-frequency offsets for filter wavelengths (rad/s)."""
    wavelengths = np.asarray(wavelengths, dtype=float)
    return 2.0 * math.pi * SPEED_OF_LIGHT * (1.0 / wavelengths - 1.0 / setup.crystal.signal_wavelength)


def _require_cw(setup, operation):
    if not setup.spectrum.is_cw:
        raise ConfigError(f'{operation} needs a continuous-wave pump')


# Picklable point evaluators for run_sweep

def _probability_at_shifts(setup, signal_mode, idler_mode, detuning, shifts):
    z_s, z_i = shifts
    return coupling_probability(setup.with_shifts(z_s=z_s, z_i=z_i), signal_mode, idler_mode, detuning)


def _probability_at_pump_shift(setup, signal_mode, idler_mode, detuning, z_p):
    return coupling_probability(setup.with_shifts(z_p=z_p), signal_mode, idler_mode, detuning)


def efficiency_map(setup, z_s_values, z_i_values, signal_mode=FGM, idler_mode=FGM,
                   detuning=DetuningPair(), normalize=True, workers=None):
    """|C|² over a (z_s, z_i) grid with a sub-grid argmax.

    Rows follow ``z_s_values`` and columns ``z_i_values``.
    """
    z_s_values = np.atleast_1d(np.asarray(z_s_values, dtype=float))
    z_i_values = np.atleast_1d(np.asarray(z_i_values, dtype=float))
    points = [(z_s, z_i) for z_s in z_s_values for z_i in z_i_values]
    func = partial(_probability_at_shifts, setup, signal_mode, idler_mode, detuning)
    raw = np.array(run_sweep(func, points, workers, label='efficiency map'))
    raw = raw.reshape(len(z_s_values), len(z_i_values))

    row, col = np.unravel_index(int(np.argmax(raw)), raw.shape)
    z_s_best, z_i_best = z_s_values[row], z_i_values[col]
    if 0 < row < len(z_s_values) - 1:
        step = z_s_values[row + 1] - z_s_values[row]
        z_s_best += step * quadratic_offset(raw[row - 1, col], raw[row, col], raw[row + 1, col])
    if 0 < col < len(z_i_values) - 1:
        step = z_i_values[col + 1] - z_i_values[col]
        z_i_best += step * quadratic_offset(raw[row, col - 1], raw[row, col], raw[row, col + 1])

    values, raw_max = _normalize(raw) if normalize else (raw, float(np.max(raw)))
    status = 'refined' if raw.size > 1 else 'grid'
    peak = OptimumPoint((float(z_s_best), float(z_i_best)), raw_max, status)
    return EfficiencyMap(z_s=z_s_values, z_i=z_i_values, values=values, peak=peak,
                         raw_max=raw_max, normalized=normalize)


def pump_focus_scan(setup, z_p_values, signal_mode=FGM, idler_mode=FGM,
                    detuning=DetuningPair(), workers=None):
    """Normalised |C|² against the pump focal position and its FWHM."""
    z_p_values = np.asarray(z_p_values, dtype=float)
    func = partial(_probability_at_pump_shift, setup, signal_mode, idler_mode, detuning)
    raw = np.array(run_sweep(func, list(z_p_values), workers, label='pump focus scan'))
    values, _ = _normalize(raw)
    width = half_max_width(z_p_values, values)
    if width is None:
        logger.warning('FWHM undefined: no half-maximum crossing inside the z_p range')
    return FocusScan(z_p=z_p_values, values=values, raw=raw, fwhm=width)


def spectral_response(setup, wavelengths, signal_mode=FGM, idler_mode=FGM):
    """|C|² against the signal filter wavelength with Ω_i = −Ω_s."""
    _require_cw(setup, 'spectral_response')
    wavelengths = np.asarray(wavelengths, dtype=float)
    omega_s = signal_detunings(setup, wavelengths)
    raw = np.abs(overlap_amplitudes(setup, signal_mode, idler_mode, omega_s, -omega_s)) ** 2
    values, _ = _normalize(raw)
    return SpectralResponse(
        wavelengths=wavelengths, raw=raw, values=values,
        peak_wavelength=float(wavelengths[int(np.argmax(raw))]),
        fwhm=half_max_width(wavelengths, values),
    )


def _probability_at_wavelength(setup, signal_mode, idler_mode, wavelength):
    omega_s = signal_detunings(setup, wavelength)
    value = overlap_amplitudes(setup, signal_mode, idler_mode, omega_s, -omega_s)
    return float(np.abs(value) ** 2)


def spectral_brightness(setup, signal_mode=FGM, idler_mode=FGM, band=DEFAULT_BAND,
                        points=DEFAULT_BAND_POINTS, xtol=None):
    """Largest |C|² over the band and its wavelength.

    A coarse scan of at least 201 points is refined by golden-section
    search; a maximum on the band edge is flagged instead of refined.
    """
    _require_cw(setup, 'spectral_brightness')
    if points < DEFAULT_BAND_POINTS:
        raise ConfigError(f'spectral brightness needs at least {DEFAULT_BAND_POINTS} band points')
    xtol = xtol or get_settings().WAVELENGTH_XTOL
    grid = np.linspace(band[0], band[1], points)
    coarse = spectral_response(setup, grid, signal_mode, idler_mode).raw
    func = partial(_probability_at_wavelength, setup, signal_mode, idler_mode)
    optimum = refine_maximum(func, grid, coarse, xtol, label='spectral brightness')
    return SpectralPeak(value=optimum.value, wavelength=optimum.location[0], status=optimum.status)


def _objective(setup, signal_mode, idler_mode, objective, detuning, band, band_points):
    if objective == 'brightness':
        return spectral_brightness(setup, signal_mode, idler_mode, band, band_points).value
    if objective == 'fixed':
        return coupling_probability(setup, signal_mode, idler_mode, detuning)
    raise ConfigError(f"objective must be 'brightness' or 'fixed', got {objective!r}")


def _locked_objective(setup, z_p, signal_mode, idler_mode, objective, detuning, band,
                      band_points, z):
    shifted = setup.with_shifts(z_p=z_p, z_s=z, z_i=z)
    return _objective(shifted, signal_mode, idler_mode, objective, detuning, band, band_points)


def best_locked_shift(setup, z_p, signal_mode=FGM, idler_mode=FGM, objective='brightness',
                      detuning=DetuningPair(), shift_range=DEFAULT_SHIFT_RANGE,
                      shift_points=DEFAULT_SHIFT_POINTS, band=DEFAULT_BAND,
                      band_points=DEFAULT_BAND_POINTS, xtol=None):
    """Best z_s = z_i for a pump focus ``z_p`` as an ``OptimumPoint``."""
    xtol = xtol or get_settings().SHIFT_XTOL
    func = partial(_locked_objective, setup, z_p, signal_mode, idler_mode, objective,
                   detuning, band, band_points)
    grid = np.linspace(shift_range[0], shift_range[1], shift_points)
    coarse = np.array([func(z) for z in grid])
    return refine_maximum(func, grid, coarse, xtol, label=f'z_s=z_i optimum at z_p={z_p:.6g}')


def optimal_signal_focus(setup, z_p_values, signal_mode=FGM, idler_mode=FGM,
                         objective='brightness', detuning=DetuningPair(),
                         shift_range=DEFAULT_SHIFT_RANGE, shift_points=DEFAULT_SHIFT_POINTS,
                         band=DEFAULT_BAND, band_points=DEFAULT_BAND_POINTS, workers=None):
    """z_s^max(z_p) under the z_s = z_i constraint and the objective at the optimum.

    ``objective`` is ``'brightness'`` (inner maximisation over the signal
    wavelength) or ``'fixed'`` (|C|² at ``detuning``). Values are
    normalised to the largest optimum along the curve.
    """
    _require_cw(setup, 'optimal_signal_focus')
    z_p_values = np.asarray(z_p_values, dtype=float)
    func = partial(best_locked_shift, setup, signal_mode=signal_mode, idler_mode=idler_mode,
                   objective=objective, detuning=detuning, shift_range=shift_range,
                   shift_points=shift_points, band=band, band_points=band_points)
    optima = run_sweep(func, list(z_p_values), workers, label='optimal focus curve')
    raw = np.array([optimum.value for optimum in optima])
    values, _ = _normalize(raw)
    z_s_max = np.array([optimum.location[0] for optimum in optima])
    fit = linear_fit(z_p_values, z_s_max)
    logger.info('z_s^max(z_p) slope %.4f, R^2 %.5f', fit.slope, fit.r_squared)
    return FocusCurve(
        z_p=z_p_values,
        z_s_max=z_s_max,
        values=values, raw=raw,
        statuses=tuple(optimum.status for optimum in optima),
        objective=objective,
        fit=fit,
    )


def focal_scenarios(setup, z_p, signal_mode=FGM, idler_mode=FGM, objective='fixed',
                    detuning=DetuningPair(), shift_range=DEFAULT_SHIFT_RANGE,
                    shift_points=DEFAULT_SHIFT_POINTS, band=DEFAULT_BAND,
                    band_points=DEFAULT_BAND_POINTS):
    """Objective in the four focal arrangements for pump focus ``z_p``."""
    def evaluate(candidate):
        return _objective(candidate, signal_mode, idler_mode, objective, detuning, band, band_points)

    optimum = best_locked_shift(setup, z_p, signal_mode, idler_mode, objective, detuning,
                                shift_range, shift_points, band, band_points)
    values = (
        evaluate(setup.with_shifts(z_p=0.0, z_s=0.0, z_i=0.0)),
        evaluate(setup.with_shifts(z_p=z_p, z_s=0.0, z_i=0.0)),
        evaluate(setup.with_shifts(z_p=z_p, z_s=z_p, z_i=z_p)),
        optimum.value,
    )
    logger.info('Focal scenarios at z_p=%.4g mm: ratios %s, z_s=z_i optimum %.4g mm',
                z_p * 1e3, ', '.join(f'{v / values[0]:.3f}' for v in values),
                optimum.location[0] * 1e3)
    return ScenarioReport(z_p=float(z_p), optimal_shift=optimum.location[0], values=values)


def optimal_focus_pair(setup, signal_mode=FGM, idler_mode=FGM, detuning=DetuningPair(),
                       start=None, xtol=None):
    """Unconstrained (z_s, z_i) maximum of |C|² by Nelder-Mead.

    Seeded at the z_s = z_i optimum unless ``start`` is given.
    """
    xtol = xtol or get_settings().SHIFT_XTOL
    if start is None:
        locked = best_locked_shift(setup, setup.pump.focal_shift, signal_mode, idler_mode,
                                   'fixed', detuning)
        start = (locked.location[0], locked.location[0])

    def loss(x):
        shifted = setup.with_shifts(z_s=x[0], z_i=x[1])
        return -coupling_probability(shifted, signal_mode, idler_mode, detuning)

    start = np.asarray(start, dtype=float)
    fatol = 1e-10 * abs(loss(start))
    result = minimize(loss, start, method='Nelder-Mead', options={'xatol': xtol, 'fatol': fatol})
    status = 'refined' if result.success else 'unconverged'
    return OptimumPoint((float(result.x[0]), float(result.x[1])), float(-result.fun), status)


def mode_distribution(setup, max_p=2, max_l=2, detuning=DetuningPair(), reference=None):
    """|C|² over the (p ≤ max_p, |ℓ| ≤ max_l) block for signal and idler.

    Normalised by ``reference`` when given (a scenario-set maximum), else
    by the table's own maximum.
    """
    modes = mode_block(max_p, max_l)
    raw = np.abs(amplitude_block(setup, modes, modes, detuning)) ** 2
    if reference is None:
        values, _ = _normalize(raw)
    else:
        values = raw / reference
    return ModeTable(signal_modes=tuple(modes), idler_modes=tuple(modes), values=values, raw=raw)


def mode_distributions(setups, max_p=2, max_l=2, detuning=DetuningPair()):
    """Mode tables for several setups sharing one normalisation."""
    tables = [mode_distribution(s, max_p, max_l, detuning) for s in setups]
    reference = max(float(np.max(t.raw)) for t in tables)
    return [ModeTable(t.signal_modes, t.idler_modes, t.raw / reference, t.raw) for t in tables]


def jsa_axes(setup, points=65, span=6.0):
    """Symmetric detuning axis of ±span/T0 resolving the pump envelope."""
    if setup.spectrum.is_cw:
        raise ConfigError('a joint spectral amplitude needs a pulsed pump')
    if span < MIN_JSA_SPAN:
        raise ConfigError(f'JSA span must cover at least ±{MIN_JSA_SPAN}/T0')
    if (points - 1) / span < MIN_POINTS_PER_HALF_WIDTH:
        raise ConfigError(
            f'{points} JSA points over ±{span}/T0 under-resolve the pump envelope; '
            f'use at least {math.ceil(MIN_POINTS_PER_HALF_WIDTH * span) + 1}'
        )
    extent = span / setup.spectrum.pulse_duration
    return np.linspace(-extent, extent, points)


def jsa_grid(setup, omega_s_values=None, omega_i_values=None, points=65, span=6.0):
    """FGM joint spectral amplitude C(Ω_s, Ω_i) including the pump envelope."""
    if setup.spectrum.is_cw:
        raise ConfigError('a joint spectral amplitude needs a pulsed pump')
    if omega_s_values is None:
        omega_s_values = jsa_axes(setup, points, span)
    if omega_i_values is None:
        omega_i_values = jsa_axes(setup, points, span)
    omega_s_values = np.asarray(omega_s_values, dtype=float)
    omega_i_values = np.asarray(omega_i_values, dtype=float)
    omega_s, omega_i = np.meshgrid(omega_s_values, omega_i_values, indexing='ij')
    values = overlap_amplitudes(setup, FGM, FGM, omega_s, omega_i)
    return JsaGrid(omega_s=omega_s_values, omega_i=omega_i_values, values=values)


def schmidt_purity(matrix):
    """Σσ⁴/(Σσ²)² from the singular values of ``matrix``."""
    matrix = np.asarray(matrix)
    if not np.any(matrix):
        raise UndefinedPurityError('purity of an all-zero joint amplitude is undefined')
    sigma2 = np.linalg.svd(matrix, compute_uv=False) ** 2
    return float(np.sum(sigma2 ** 2) / np.sum(sigma2) ** 2)


def smf_spectral_purity(jsa):
    """Spectral purity of the heralded single-mode-filtered signal photon."""
    return schmidt_purity(jsa.values)


def smf_purity_trace(jsa):
    """Unnormalised Tr ρ² of the filtered signal photon.

    The quadruple frequency integral of C C C* C* reduces on a uniform
    grid to (ΔΩ_s ΔΩ_i)² Σσ⁴; unlike ``smf_spectral_purity`` it scales
    with the joint amplitude.
    """
    if not np.any(jsa.values):
        return 0.0
    weight = _axis_step(jsa.omega_s) * _axis_step(jsa.omega_i)
    sigma2 = np.linalg.svd(np.asarray(jsa.values), compute_uv=False) ** 2
    return float(weight ** 2 * np.sum(sigma2 ** 2))


def _axis_step(axis):
    axis = np.asarray(axis, dtype=float)
    if len(axis) < 2:
        return 1.0
    return float((axis[-1] - axis[0]) / (len(axis) - 1))


def truncated_signal_purity(setup, signal_modes, idler_modes, omega_s_values, omega_i_values):
    """Signal purity in a truncated (LG mode × frequency) basis.

    The amplitude tensor indexed by (signal mode, Ω_s) × (idler mode, Ω_i)
    is flattened to a matrix and treated like a joint spectral amplitude.
    """
    omega_s_values = np.asarray(omega_s_values, dtype=float)
    omega_i_values = np.asarray(omega_i_values, dtype=float)
    omega_s, omega_i = np.meshgrid(omega_s_values, omega_i_values, indexing='ij')
    tensor = amplitude_tensor(setup, signal_modes, idler_modes, omega_s, omega_i)
    tensor = tensor.reshape(len(signal_modes), len(idler_modes),
                            len(omega_s_values), len(omega_i_values))
    matrix = tensor.transpose(0, 2, 1, 3).reshape(len(signal_modes) * len(omega_s_values),
                                                  len(idler_modes) * len(omega_i_values))
    return schmidt_purity(matrix)


def _purity_at_shifts(setup, points, span, shifts):
    z_p, z_si = shifts
    jsa = jsa_grid(setup.with_shifts(z_p=z_p, z_s=z_si, z_i=z_si), points=points, span=span)
    try:
        schmidt = smf_spectral_purity(jsa)
    except UndefinedPurityError:
        schmidt = math.nan
    return smf_purity_trace(jsa), schmidt


def purity_map(setup, z_p_values, z_si_values, points=65, span=6.0, workers=None):
    """Fibre-filtered purity over a (z_p, z_s = z_i) grid as a ``PurityMap``.

    The map is the unnormalised trace; the scale-free Schmidt ratio is
    carried alongside.
    """
    z_p_values = np.asarray(z_p_values, dtype=float)
    z_si_values = np.asarray(z_si_values, dtype=float)
    cells = [(z_p, z_si) for z_p in z_p_values for z_si in z_si_values]
    func = partial(_purity_at_shifts, setup, points, span)
    results = run_sweep(func, cells, workers, label='purity map')
    shape = (len(z_p_values), len(z_si_values))
    raw = np.array([trace for trace, _ in results]).reshape(shape)
    schmidt = np.array([ratio for _, ratio in results]).reshape(shape)
    values, _ = _normalize(raw)
    return PurityMap(z_p=z_p_values, z_si=z_si_values, values=values, raw=raw, schmidt=schmidt)
