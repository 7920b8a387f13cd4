"""Closed-form LG overlap amplitudes of the down-converted pair.

For a signal mode (p_s, ℓ_s) and idler mode (p_i, ℓ_i) with ℓ_s + ℓ_i = 0
and ν = |ℓ_i| the projection of the shifted mode function reduces to

    C = (w_p/√(2π)) π² S_p(Ω_s+Ω_i)
        Σ_{j_s, j_i} T*_{j_s} T*_{j_i} Γ(h) Γ(b)
        ∫ dz exp(i z Δ) D^ν / (H^h B^b) ₂F̃₁(h, b; 1+ν; D²/(H B))

with h = 1 + j_s + ν, b = 1 + j_i + ν over the crystal z ∈ [−L/2, L/2] and

    D = −w_p²/4 − i (z+z_p)/(2k_p)
    H = (w_p² + w_s²)/4 + (i/2) [(z+z_p)/k_p − (z+z_s)/k_s]
    B = (w_p² + w_i²)/4 + (i/2) [(z+z_p)/k_p − (z+z_i)/k_i]

Δ is the longitudinal phase rate from group velocities and GVD (see
``phase_rate``). The z-profile of every mode pair does not depend on the
detuning, so it is evaluated once per quadrature node set and reused for
any number of detunings.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from spdcfocus.exceptions import (
    InvalidDetuningError, NonFiniteAmplitudeError, SeriesConvergenceError,
    SpecialFunctionDomainError,
)
from spdcfocus.models import AmplitudeResult, OverlapTerms
from spdcfocus.services.modes import t_coefficients
from spdcfocus.services.quadrature import adaptive_gauss_legendre, mapped_rule
from spdcfocus.services.specfun import hyp2f1_regularized

logger = logging.getLogger(__name__)

PREFACTOR = math.pi ** 2 / math.sqrt(2.0 * math.pi)


def phase_rate(setup, omega_s, omega_i):
    """Δ(Ω_s, Ω_i) in rad/m; broadcasts over detuning arrays.

    (Ω_s+Ω_i)/u_p − Ω_s/u_s − Ω_i/u_i + [G_p(Ω_s+Ω_i)² − G_sΩ_s² − G_iΩ_i²]/2
    plus any residual central mismatch of a user-fixed poling period.
    """
    pump, signal, idler = setup.constants
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    omega_p = omega_s + omega_i
    return (
        omega_p * pump.inv_u - omega_s * signal.inv_u - omega_i * idler.inv_u
        + 0.5 * (pump.G * omega_p ** 2 - signal.G * omega_s ** 2 - idler.G * omega_i ** 2)
        + setup.residual_mismatch
    )


def spectral_factor(setup, omega_s, omega_i):
    """Pump spectral amplitude at Ω_s + Ω_i (1 under a continuous-wave pump)."""
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    if setup.spectrum.is_cw:
        if not np.allclose(omega_i, -omega_s, rtol=1e-12, atol=1e-3):
            raise InvalidDetuningError(
                'a continuous-wave pump requires omega_i = -omega_s for every detuning'
            )
        return np.ones(np.broadcast(omega_s, omega_i).shape)
    t0 = setup.spectrum.pulse_duration
    return t0 / math.sqrt(math.pi) * np.exp(-0.25 * t0 ** 2 * (omega_s + omega_i) ** 2)


def overlap_terms(setup, j_s, j_i, nu, z):
    """Exponents and complex widths of one (j_s, j_i) summand at nodes ``z``."""
    pump, signal, idler = setup.constants
    z = np.asarray(z, dtype=float)
    zp = (z + setup.pump.focal_shift) / pump.k
    zs = (z + setup.signal.focal_shift) / signal.k
    zi = (z + setup.idler.focal_shift) / idler.k
    wp2, ws2, wi2 = setup.pump.waist ** 2, setup.signal.waist ** 2, setup.idler.waist ** 2
    return OverlapTerms(
        h=1 + j_s + nu,
        b=1 + j_i + nu,
        D=-0.25 * wp2 - 0.5j * zp,
        H=0.25 * (wp2 + ws2) + 0.5j * (zp - zs),
        B=0.25 * (wp2 + wi2) + 0.5j * (zp - zi),
    )


def term_profile(setup, j_s, j_i, nu, z):
    """D^ν/(H^h B^b) ₂F̃₁(h, b; 1+ν; D²/(HB)) and the series length used."""
    terms = overlap_terms(setup, j_s, j_i, nu, z)
    argument = terms.D ** 2 / (terms.H * terms.B)
    try:
        hyp, diagnostics = hyp2f1_regularized(terms.h, terms.b, 1 + nu, argument)
    except SeriesConvergenceError as exc:
        raise SeriesConvergenceError(
            f'{exc} (j_s={j_s}, j_i={j_i}, z in [{np.min(z):.6g}, {np.max(z):.6g}] m)',
            exc.diagnostics,
        ) from exc
    except SpecialFunctionDomainError as exc:
        raise type(exc)(
            f'{exc} (j_s={j_s}, j_i={j_i}, z in [{np.min(z):.6g}, {np.max(z):.6g}] m)'
        ) from exc
    value = terms.D ** nu / (terms.H ** terms.h * terms.B ** terms.b) * hyp
    return value, diagnostics.terms_used


@lru_cache(maxsize=512)
def _pair_profile(setup, signal_mode, idler_mode, n):
    """Detuning-independent z-profile of one mode pair on the n-point rule."""
    nu = abs(idler_mode.l)
    nodes, _ = mapped_rule(n, -0.5 * setup.crystal.length, 0.5 * setup.crystal.length)
    t_signal = np.conj(t_coefficients(signal_mode, setup.signal.waist))
    t_idler = np.conj(t_coefficients(idler_mode, setup.idler.waist))
    profile = np.zeros(n, dtype=complex)
    max_terms = 0
    for j_s, t_s in enumerate(t_signal):
        for j_i, t_i in enumerate(t_idler):
            value, used = term_profile(setup, j_s, j_i, nu, nodes)
            weight = math.factorial(j_s + nu) * math.factorial(j_i + nu)
            profile += t_s * t_i * weight * value
            max_terms = max(max_terms, used)
    profile.flags.writeable = False
    return profile, max_terms


def _integrate_pairs(setup, pairs, omega_s, omega_i):
    """Amplitudes for ``pairs`` × flattened detunings, shape (len(pairs), M)."""
    omega_s = np.ravel(np.asarray(omega_s, dtype=float))
    omega_i = np.ravel(np.asarray(omega_i, dtype=float))
    spectral = spectral_factor(setup, omega_s, omega_i)
    deltas = phase_rate(setup, omega_s, omega_i)
    length = setup.crystal.length
    series_terms = [0]

    def integrand(z):
        profiles = []
        for signal_mode, idler_mode in pairs:
            profile, used = _pair_profile(setup, signal_mode, idler_mode, len(z))
            profiles.append(profile)
            series_terms[0] = max(series_terms[0], used)
        return np.array(profiles), np.exp(1j * np.outer(deltas, z))

    def reducer(values, weights):
        profiles, phases = values
        estimate = (profiles * weights) @ phases.T
        scale = (np.abs(profiles) @ weights)[:, None] * np.ones(len(deltas))
        return estimate, scale

    estimate, nodes = adaptive_gauss_legendre(integrand, -0.5 * length, 0.5 * length,
                                              reducer=reducer)
    result = PREFACTOR * setup.pump.waist * spectral[None, :] * estimate
    if not np.all(np.isfinite(result)):
        raise NonFiniteAmplitudeError(f'non-finite overlap amplitude for {setup!r}')
    return result, nodes, series_terms[0]


def z_integral(setup, j_s, j_i, nu, detuning):
    """∫ dz exp(izΔ) D^ν/(H^h B^b) ₂F̃₁(h, b; 1+ν; D²/(HB)) for one summand."""
    delta = float(phase_rate(setup, detuning.omega_s, detuning.omega_i))
    length = setup.crystal.length

    def integrand(z):
        value, _ = term_profile(setup, j_s, j_i, nu, z)
        return value * np.exp(1j * delta * z)

    value, nodes = adaptive_gauss_legendre(integrand, -0.5 * length, 0.5 * length)
    logger.debug('z integral (j_s=%d, j_i=%d, nu=%d) used %d nodes', j_s, j_i, nu, nodes)
    return complex(value)


def overlap_amplitude(setup, signal_mode, idler_mode, detuning):
    """Complex overlap amplitude C for one mode pair and detuning."""
    if signal_mode.l + idler_mode.l != 0:
        return AmplitudeResult(0j)
    if setup.spectrum.is_cw:
        detuning.check_continuous_wave()
    values, nodes, series_terms = _integrate_pairs(
        setup, [(signal_mode, idler_mode)], detuning.omega_s, detuning.omega_i,
    )
    return AmplitudeResult(complex(values[0, 0]), quadrature_nodes=nodes,
                           max_series_terms=series_terms)


def coupling_probability(setup, signal_mode, idler_mode, detuning):
    """Single-mode coupling efficiency |C|²."""
    return overlap_amplitude(setup, signal_mode, idler_mode, detuning).probability


def overlap_amplitudes(setup, signal_mode, idler_mode, omega_s, omega_i):
    """C for one mode pair over broadcast detuning arrays."""
    shape = np.broadcast(np.asarray(omega_s), np.asarray(omega_i)).shape
    if signal_mode.l + idler_mode.l != 0:
        return np.zeros(shape, dtype=complex)
    omega_s, omega_i = np.broadcast_arrays(np.asarray(omega_s, dtype=float),
                                           np.asarray(omega_i, dtype=float))
    values, _, _ = _integrate_pairs(setup, [(signal_mode, idler_mode)], omega_s, omega_i)
    return values[0].reshape(shape)


def amplitude_tensor(setup, signal_modes, idler_modes, omega_s, omega_i):
    """C over mode lists and flattened detunings, shape (Ns, Ni, M).

    Pairs violating ℓ_s + ℓ_i = 0 are exactly zero; all other pairs share
    one adaptive quadrature.
    """
    omega_s = np.ravel(np.asarray(omega_s, dtype=float))
    omega_i = np.ravel(np.asarray(omega_i, dtype=float))
    tensor = np.zeros((len(signal_modes), len(idler_modes), omega_s.size), dtype=complex)
    index = [(a, b) for a, s in enumerate(signal_modes) for b, i in enumerate(idler_modes)
             if s.l + i.l == 0]
    if not index:
        return tensor
    pairs = [(signal_modes[a], idler_modes[b]) for a, b in index]
    values, nodes, _ = _integrate_pairs(setup, pairs, omega_s, omega_i)
    logger.debug('Mode block of %d coupled pairs used %d nodes', len(pairs), nodes)
    for row, (a, b) in enumerate(index):
        tensor[a, b] = values[row]
    return tensor


def amplitude_block(setup, signal_modes, idler_modes, detuning):
    """Matrix of C over (signal mode, idler mode) at one detuning."""
    if setup.spectrum.is_cw:
        detuning.check_continuous_wave()
    return amplitude_tensor(setup, signal_modes, idler_modes,
                            [detuning.omega_s], [detuning.omega_i])[:, :, 0]
