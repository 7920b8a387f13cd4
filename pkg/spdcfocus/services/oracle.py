"""Brute-force projection of the shifted mode function onto LG modes.

Independent of the closed form: the mode function is assembled directly
from the pump Gaussian, the Fresnel-expanded longitudinal wavevectors and
the pump spectrum, and projected on a tensor grid in polar momentum
coordinates (Gauss-Legendre in ρ, trapezoid in φ) with Gauss-Legendre
nodes along the crystal.
"""

import logging
import math
from functools import lru_cache

import numpy as np

from spdcfocus.exceptions import OracleConvergenceError, ParaxialityError
from spdcfocus.models import OracleGrid
from spdcfocus.services.amplitude import phase_rate, spectral_factor
from spdcfocus.services.modes import lg_polar
from spdcfocus.services.quadrature import adaptive_gauss_legendre, mapped_rule

logger = logging.getLogger(__name__)

PARAXIAL_LIMIT = 0.2
CONVERGENCE_RTOL = 5e-3
NOISE_FLOOR = 1e-6
MAX_DOUBLINGS = 2
Z_CHUNK = 8
FIELD_CACHE_CELLS = 1 << 22


def pump_profile(setup, q_p):
    """Pump transverse amplitude V_p(q) = (w_p/√(2π)) exp(−w_p²|q|²/4)."""
    q_p = np.asarray(q_p, dtype=float)
    w_p = setup.pump.waist
    return w_p / math.sqrt(2.0 * math.pi) * np.exp(-0.25 * w_p ** 2 * np.sum(q_p ** 2, axis=-1))


def _check_paraxial(setup, q, constants):
    if np.any(np.linalg.norm(np.asarray(q, dtype=float), axis=-1) >= PARAXIAL_LIMIT * constants.k):
        raise ParaxialityError(
            f'transverse momentum exceeds {PARAXIAL_LIMIT} k = {PARAXIAL_LIMIT * constants.k:.6g} rad/m'
        )


def mode_function(setup, q_s, q_i, detuning):
    """Φ(q_s, q_i, Ω_s, Ω_i) for momenta with shape (..., 2).

    The longitudinal phase keeps the Fresnel terms −|q|²(z + z_x)/(2k_x) of
    each wave and the detuning rate zΔ; the central constant phase cancels
    by quasi-phase matching.
    """
    pump, signal, idler = setup.constants
    q_s = np.asarray(q_s, dtype=float)
    q_i = np.asarray(q_i, dtype=float)
    q_p = q_s + q_i
    _check_paraxial(setup, q_s, signal)
    _check_paraxial(setup, q_i, idler)
    _check_paraxial(setup, q_p, pump)

    qs2 = np.sum(q_s ** 2, axis=-1)[..., None]
    qi2 = np.sum(q_i ** 2, axis=-1)[..., None]
    qp2 = np.sum(q_p ** 2, axis=-1)[..., None]
    delta = float(phase_rate(setup, detuning.omega_s, detuning.omega_i))

    def integrand(z):
        phase = (
            z * delta
            - qp2 * (z + setup.pump.focal_shift) / (2.0 * pump.k)
            + qs2 * (z + setup.signal.focal_shift) / (2.0 * signal.k)
            + qi2 * (z + setup.idler.focal_shift) / (2.0 * idler.k)
        )
        return np.exp(1j * phase)

    length = setup.crystal.length
    longitudinal, _ = adaptive_gauss_legendre(integrand, -0.5 * length, 0.5 * length)
    value = (pump_profile(setup, q_p) * spectral_factor(setup, detuning.omega_s, detuning.omega_i)
             * longitudinal)
    return complex(value) if np.ndim(value) == 0 else value


def _grid_nodes(setup, grid):
    pump, signal, idler = setup.constants
    cutoff = grid.resolved_cutoff(setup)
    for constants in (pump, signal, idler):
        if cutoff >= PARAXIAL_LIMIT * constants.k:
            raise ParaxialityError(f'oracle radial cutoff {cutoff:.6g} rad/m is not paraxial')
    rho, rho_weights = mapped_rule(grid.radial_nodes, 0.0, cutoff)
    phi = 2.0 * math.pi * np.arange(grid.azimuthal_nodes) / grid.azimuthal_nodes
    return rho, rho_weights * rho, phi, 2.0 * math.pi / grid.azimuthal_nodes


def _field_slices(setup, detuning, grid):
    """Yield Φ on (φ_s, ρ_i, φ_i) for each signal radial node in turn."""
    pump, signal, idler = setup.constants
    rho, _, phi, _ = _grid_nodes(setup, grid)
    length = setup.crystal.length
    z, z_weights = mapped_rule(grid.z_nodes, -0.5 * length, 0.5 * length)
    delta = float(phase_rate(setup, detuning.omega_s, detuning.omega_i))

    cos_diff = np.cos(phi[:, None] - phi[None, :])
    depth = -0.25 * setup.pump.waist ** 2 - 0.5j * (z + setup.pump.focal_shift) / pump.k
    idler_phase = np.exp(0.5j * rho[None, :] ** 2 * (z[:, None] + setup.idler.focal_shift) / idler.k)
    # fixed outer-node order keeps the reduction reproducible
    for rho_s in rho:
        qp2 = (rho_s ** 2 + rho[None, :, None] ** 2
               + 2.0 * rho_s * rho[None, :, None] * cos_diff[:, None, :])
        signal_phase = np.exp(1j * (z * delta + 0.5 * rho_s ** 2 * (z + setup.signal.focal_shift) / signal.k))
        field = np.zeros(qp2.shape, dtype=complex)
        for start in range(0, len(z), Z_CHUNK):
            chunk = slice(start, start + Z_CHUNK)
            kernel = np.exp(qp2[None] * depth[chunk, None, None, None])
            field += np.einsum('c,cr,cxry->xry', z_weights[chunk] * signal_phase[chunk],
                               idler_phase[chunk], kernel)
        yield field


@lru_cache(maxsize=2)
def _cached_field(setup, detuning, grid):
    """Φ on the full (ρ_s, φ_s, ρ_i, φ_i) grid, shared by every mode pair."""
    field = np.stack(list(_field_slices(setup, detuning, grid)))
    field.flags.writeable = False
    return field


def _project(setup, signal_mode, idler_mode, detuning, grid):
    """⟨LG_s LG_i | Φ⟩ on one grid, plus the grid norm of Φ.

    Grids up to ``FIELD_CACHE_CELLS`` cells keep Φ in memory across mode
    pairs; larger ones stream it one signal radial node at a time.
    """
    rho, rho_weights, phi, phi_weight = _grid_nodes(setup, grid)
    signal_conj = (np.conj(lg_polar(signal_mode, setup.signal.waist, rho[:, None], phi[None, :]))
                   * rho_weights[:, None] * phi_weight)
    idler_conj = (np.conj(lg_polar(idler_mode, setup.idler.waist, rho[:, None], phi[None, :]))
                  * rho_weights[:, None] * phi_weight)
    idler_abs = rho_weights[:, None] * phi_weight * np.ones_like(phi)[None, :]

    if (len(rho) * len(phi)) ** 2 <= FIELD_CACHE_CELLS:
        field = _cached_field(setup, detuning, grid)
        amplitude = np.einsum('axry,ry,ax->', field, idler_conj, signal_conj)
        norm2 = float(np.einsum('axry,ry,a->', np.abs(field) ** 2, idler_abs, rho_weights)) * phi_weight
    else:
        amplitude = 0j
        norm2 = 0.0
        for n, field in enumerate(_field_slices(setup, detuning, grid)):
            amplitude += np.einsum('xry,ry,x->', field, idler_conj, signal_conj[n])
            norm2 += float(np.einsum('xry,ry->', np.abs(field) ** 2, idler_abs)) * rho_weights[n] * phi_weight

    prefactor = (setup.pump.waist / math.sqrt(2.0 * math.pi)
                 * float(spectral_factor(setup, detuning.omega_s, detuning.omega_i)))
    return prefactor * amplitude, abs(prefactor) * math.sqrt(norm2)


def brute_force_amplitude(setup, signal_mode, idler_mode, detuning, grid=None):
    """Overlap amplitude by direct quadrature, certified by grid doubling.

    The base grid and each doubled grid are compared; agreement to 0.5 %
    (or both values below 1e−6 of the mode-function norm) ends the
    refinement. Two doublings without agreement raise
    ``OracleConvergenceError``.
    """
    grid = grid or OracleGrid()
    if setup.spectrum.is_cw:
        detuning.check_continuous_wave()
    previous, scale = _project(setup, signal_mode, idler_mode, detuning, grid)
    estimates = [previous]
    for _ in range(MAX_DOUBLINGS):
        grid = grid.doubled()
        current, scale = _project(setup, signal_mode, idler_mode, detuning, grid)
        estimates.append(current)
        negligible = max(abs(current), abs(previous)) <= NOISE_FLOOR * scale
        if negligible or abs(current - previous) <= CONVERGENCE_RTOL * abs(current):
            logger.debug('Oracle converged for (%s|%s) on %s', signal_mode, idler_mode, grid)
            return current
        previous = current
    raise OracleConvergenceError(
        f'oracle amplitude for ({signal_mode}|{idler_mode}) did not settle after '
        f'{MAX_DOUBLINGS} grid doublings',
        estimates=estimates[-2:],
    )
