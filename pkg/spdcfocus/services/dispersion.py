"""Crystal dispersion: refractive index, group velocity, GVD and poling period.

Sellmeier models use the pole form

    n² = A + Σ_j B_j λ² / (λ² − C_j) − F λ²      (λ in µm)

so derivatives with respect to wavelength are available in closed form and
no finite-difference step has to be tuned.
"""

import logging
import math

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from spdcfocus.exceptions import ConfigError, NoPhaseMatchingError, WavelengthRangeError
from spdcfocus.models import OpticalConstants, SellmeierModel

logger = logging.getLogger(__name__)

MICRON = 1e-6

# KTP, z-polarised wave, room temperature
KTP_Z_DEFAULT = SellmeierModel(
    name='ktp-z-default',
    coefficients=(2.12725, 9.68956e-3, 1.18431, 5.14852e-2, 0.6603, 100.00507),
    valid_range=(0.35, 3.6),
)

# KTP, y-polarised wave, room temperature
KTP_Y = SellmeierModel(
    name='ktp-y',
    coefficients=(2.09930, 0.0138408, 0.922683, 0.0467695),
    valid_range=(0.35, 3.6),
)

BUILTIN_MODELS = {model.name: model for model in (KTP_Z_DEFAULT, KTP_Y)}
DEFAULT_MODEL_NAME = KTP_Z_DEFAULT.name


def get_model(name, extra_models=None):
    """Look up a Sellmeier model by name, user-defined models first."""
    if extra_models and name in extra_models:
        return extra_models[name]
    try:
        return BUILTIN_MODELS[name]
    except KeyError:
        known = sorted(set(BUILTIN_MODELS) | set(extra_models or ()))
        raise ConfigError(f'unknown dispersion model {name!r}; known models: {known}') from None


def _check_range(model, wavelength):
    lo, hi = model.valid_range
    x = np.asarray(wavelength, dtype=float) / MICRON
    if np.any(~np.isfinite(x)) or np.any(x < lo) or np.any(x > hi):
        bad = x[(x < lo) | (x > hi) | ~np.isfinite(x)] if x.ndim else x
        raise WavelengthRangeError(model.name, float(np.ravel(bad)[0]) * MICRON, model.valid_range)
    return x


def _sellmeier(model, x):
    """n² and its first two derivatives with respect to λ (in µm units)."""
    A, F = model.coefficients[:2]
    x2 = x * x
    f = A - F * x2
    df = -2.0 * F * x
    d2f = -2.0 * F * np.ones_like(x)
    for B, C in model.poles:
        denom = x2 - C
        f = f + B * x2 / denom
        df = df - 2.0 * B * C * x / denom ** 2
        d2f = d2f + 2.0 * B * C * (3.0 * x2 + C) / denom ** 3
    return f, df, d2f


def _index_and_derivatives(model, wavelength):
    x = _check_range(model, wavelength)
    f, df, d2f = _sellmeier(model, x)
    if np.any(f <= 1.0):
        raise WavelengthRangeError(model.name, float(np.ravel(x)[np.argmin(np.ravel(f))]) * MICRON,
                                   model.valid_range)
    n = np.sqrt(f)
    dn = df / (2.0 * n) / MICRON
    d2n = (d2f / (2.0 * n) - df ** 2 / (4.0 * n ** 3)) / MICRON ** 2
    return n, dn, d2n


def refractive_index(model, wavelength):
    """Refractive index at ``wavelength`` (m); scalar or array."""
    n, _, _ = _index_and_derivatives(model, wavelength)
    return float(n) if np.ndim(n) == 0 else n


def group_index(model, wavelength):
    """n − λ dn/dλ."""
    n, dn, _ = _index_and_derivatives(model, wavelength)
    ng = n - np.asarray(wavelength) * dn
    return float(ng) if np.ndim(ng) == 0 else ng


def optical_constants(model, wavelength):
    """Central wavenumber, inverse group velocity and GVD at ``wavelength``.

    k = 2πn/λ, dk/dΩ = (n − λ n')/c and d²k/dΩ² = λ³ n''/(2π c²).
    """
    wavelength = float(wavelength)
    n, dn, d2n = (float(v) for v in _index_and_derivatives(model, wavelength))
    k = 2.0 * math.pi * n / wavelength
    inv_u = (n - wavelength * dn) / SPEED_OF_LIGHT
    gvd = wavelength ** 3 * d2n / (2.0 * math.pi * SPEED_OF_LIGHT ** 2)
    return OpticalConstants(wavelength=wavelength, n=n, k=k, inv_u=inv_u, G=gvd)


def idler_wavelength(pump_wavelength, signal_wavelength):
    """Idler wavelength fixed by energy conservation."""
    inv = 1.0 / pump_wavelength - 1.0 / signal_wavelength
    if inv <= 0:
        raise ConfigError('signal wavelength must exceed the pump wavelength')
    return 1.0 / inv


def constants_for(crystal, models):
    """OpticalConstants for (pump, signal, idler) at the crystal's central wavelengths."""
    return tuple(optical_constants(model, wavelength)
                 for model, wavelength in zip(models, crystal.wavelengths))


def phase_mismatch(constants, poling_period):
    """k_p − k_s − k_i − 2π/Λ; an infinite Λ describes an unpoled crystal."""
    pump, signal, idler = constants
    mismatch = pump.k - signal.k - idler.k
    if math.isinf(poling_period):
        return mismatch
    return mismatch - 2.0 * math.pi / poling_period


def solve_poling_period(crystal, models):
    """Poling period that cancels the central phase mismatch."""
    constants = constants_for(crystal, models)
    mismatch = phase_mismatch(constants, math.inf)
    if mismatch <= 0:
        raise NoPhaseMatchingError(
            f'k_p - k_s - k_i = {mismatch:.6g} rad/m is not positive; '
            'quasi-phase matching needs a negative poling period'
        )
    period = 2.0 * math.pi / mismatch
    logger.debug('Solved poling period: %.6g um (k_p - k_s - k_i = %.6g rad/m)',
                period / MICRON, mismatch)
    return period
