"""Laguerre-Gaussian modes in transverse-momentum space.

A mode of waist ``w`` at its own focal plane is written as a finite
polynomial in the radial momentum ρ = |q|:

    LG_p^ℓ(q) = Σ_{k=0}^{p} T_k^{p,ℓ} ρ^{2k+|ℓ|} exp(−w²ρ²/4) exp(iℓφ)

which equals the usual Laguerre form
(−1)^p i^ℓ √(p!/(π(p+|ℓ|)!)) (w/√2) (wρ/√2)^{|ℓ|} L_p^{|ℓ|}(w²ρ²/2) exp(−w²ρ²/4) exp(iℓφ)
and square-integrates to one over the transverse plane.
"""

import math

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from spdcfocus.exceptions import SpecialFunctionDomainError
from spdcfocus.models import LGIndex

EXACT_FACTORIAL_LIMIT = 20

_I_POWERS = (1, 1j, -1, -1j)


def i_power(l):  # noqa: E741
    """i^ℓ for integer ℓ without floating-point phase drift."""
    return _I_POWERS[l % 4]


def mode_block(max_p, max_l):
    """All modes with p ≤ max_p and |ℓ| ≤ max_l, ordered by (p, ℓ)."""
    return [LGIndex(p, l) for p in range(max_p + 1) for l in range(-max_l, max_l + 1)]  # noqa: E741


def t_coefficient(p, l, k_index, waist):  # noqa: E741
    """Expansion coefficient T_k^{p,ℓ} for the polynomial form of LG_p^ℓ.

    T_k = (−1)^{p+k} i^ℓ / ((p−k)! (|ℓ|+k)! k!) · √(p! (p+|ℓ|)! / π) · (w/√2)^{2k+|ℓ|+1}
    """
    if not 0 <= k_index <= p:
        raise SpecialFunctionDomainError(f'expansion index {k_index} outside 0..{p}')
    m = abs(l)
    sign = -1 if (p + k_index) % 2 else 1
    power = 2 * k_index + m + 1
    if p + m <= EXACT_FACTORIAL_LIMIT:
        ratio = math.sqrt(math.factorial(p) * math.factorial(p + m) / math.pi) / (
            math.factorial(p - k_index) * math.factorial(m + k_index) * math.factorial(k_index)
        )
        magnitude = ratio * (waist / math.sqrt(2.0)) ** power
    else:
        log_magnitude = (
            0.5 * (gammaln(p + 1) + gammaln(p + m + 1) - math.log(math.pi))
            - gammaln(p - k_index + 1) - gammaln(m + k_index + 1) - gammaln(k_index + 1)
            + power * math.log(waist / math.sqrt(2.0))
        )
        magnitude = math.exp(log_magnitude)
    return sign * i_power(l) * magnitude


def t_coefficients(mode, waist):
    """All T_k^{p,ℓ}, k = 0..p, as a complex array."""
    return np.array([t_coefficient(mode.p, mode.l, k, waist) for k in range(mode.p + 1)],
                    dtype=complex)


def lg_polar(mode, waist, rho, phi):
    """LG amplitude on polar momentum coordinates (broadcasting)."""
    m = abs(mode.l)
    rho = np.asarray(rho, dtype=float)
    x = 0.5 * (waist * rho) ** 2
    norm = math.exp(0.5 * (gammaln(mode.p + 1) - gammaln(mode.p + m + 1)) - 0.5 * math.log(math.pi))
    radial = (
        (-1) ** mode.p * norm * (waist / math.sqrt(2.0))
        * (waist * rho / math.sqrt(2.0)) ** m
        * eval_genlaguerre(mode.p, m, x)
        * np.exp(-0.5 * x)
    )
    return i_power(mode.l) * radial * np.exp(1j * mode.l * np.asarray(phi))


def lg_momentum_amplitude(mode, waist, q):
    """LG_p^ℓ(q) for transverse momenta ``q`` with shape (..., 2) in rad/m."""
    q = np.asarray(q, dtype=float)
    rho = np.hypot(q[..., 0], q[..., 1])
    phi = np.arctan2(q[..., 1], q[..., 0])
    value = lg_polar(mode, waist, rho, phi)
    return complex(value) if value.ndim == 0 else value
