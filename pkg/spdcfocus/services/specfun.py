"""Complex log-gamma and the regularized Gauss hypergeometric function.

Only the parameter regime reached by the overlap amplitude is supported:
real ``a, b > 0`` and a positive integer ``c``. Anything else is refused
instead of silently approximated.
"""

import logging
import math

import numpy as np
from scipy.special import loggamma, rgamma

from spdcfocus import get_settings
from spdcfocus.exceptions import PoleError, SeriesConvergenceError, SpecialFunctionDomainError
from spdcfocus.models import SeriesDiagnostics, Transformation

logger = logging.getLogger(__name__)

SERIES_RTOL = 1e-16


def log_gamma(z):
    """Principal branch of ln Γ(z) for complex ``z``."""
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real):
        raise PoleError(f'log_gamma has a pole at {z.real:g}')
    return complex(loggamma(z))


def _nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def _check_parameters(a, b, c):
    if not (a > 0 and b > 0):
        raise SpecialFunctionDomainError(f'hyp2f1 needs a, b > 0, got a={a}, b={b}')
    if not (c >= 1 and float(c).is_integer()):
        raise SpecialFunctionDomainError(f'hyp2f1 needs a positive integer c, got c={c}')


def _power_series(a, b, c, z, max_terms):
    """Σ (a)_m (b)_m / ((c)_m m!) z^m, vectorised over ``z``.

    Stops once the next term, inflated by the geometric tail bound, falls
    below ``SERIES_RTOL`` of the partial sum for every element. A
    non-positive integer ``a`` or ``b`` makes the sum a polynomial.
    """
    z = np.asarray(z, dtype=complex)
    total = np.ones_like(z)
    term = np.ones_like(z)
    abs_z = np.abs(z)
    active = np.ones(z.shape, dtype=bool)
    m = 0
    while m + 1 < max_terms:
        coef = (a + m) * (b + m) / ((c + m) * (m + 1.0))
        if coef == 0.0:
            return total, m + 1, True
        term = np.where(active, term * coef * z, 0.0)
        total = total + term
        m += 1
        # tail bound assumes later coefficients do not exceed max(coef, 1)
        ratio = max(abs(coef), 1.0) * abs_z
        tail = np.where(ratio < 1.0, np.abs(term) / np.maximum(1.0 - ratio, 1e-300), np.inf)
        done = (tail <= SERIES_RTOL * np.abs(total)) | (term == 0)
        active &= ~done
        if not active.any():
            return total, m + 1, True
    return total, max_terms, False


def _transform(a, b, c, z, transformation):
    """Parameters, argument and prefactor of the series after a transformation."""
    if transformation is Transformation.EULER:
        # F(a,b;c;z) = (1−z)^{c−a−b} F(c−a, c−b; c; z)
        return (c - a, c - b, z, (1.0 - z) ** (c - a - b))
    w = z / (z - 1.0)
    if _nonpositive_integer(c - a) or not _nonpositive_integer(c - b):
        # F(a,b;c;z) = (1−z)^{−b} F(c−a, b; c; z/(z−1))
        return (c - a, b, w, (1.0 - z) ** (-b))
    # F(a,b;c;z) = (1−z)^{−a} F(a, c−b; c; z/(z−1))
    return (a, c - b, w, (1.0 - z) ** (-a))


def hyp2f1_regularized(a, b, c, z, transformation=None, max_terms=None):
    """₂F₁(a, b; c; z)/Γ(c) and the diagnostics of the series that produced it.

    ``z`` may be a scalar or an array. By default the direct power series
    is used where |z| ≤ 0.8 and the Pfaff transformation z → z/(z−1)
    elsewhere; ``transformation`` forces one path for every element.
    """
    _check_parameters(a, b, c)
    settings = get_settings()
    max_terms = max_terms or settings.SERIES_MAX_TERMS
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z == 1.0):
        raise SpecialFunctionDomainError('hyp2f1 is singular at z = 1')

    if transformation is None:
        transformed = np.abs(z) > settings.SERIES_DIRECT_RADIUS
        chosen = Transformation.PFAFF
    else:
        transformation = Transformation(transformation)
        transformed = np.full(z.shape, transformation is not Transformation.NONE)
        chosen = transformation

    values = np.empty_like(z)
    terms_used = 0
    converged = True
    groups = [(~transformed, Transformation.NONE), (transformed, chosen)]
    for mask, path in groups:
        if not mask.any():
            continue
        if path is Transformation.NONE:
            pa, pb, arg, prefactor = a, b, z[mask], 1.0
        else:
            pa, pb, arg, prefactor = _transform(a, b, c, z[mask], path)
        terminating = _nonpositive_integer(pa) or _nonpositive_integer(pb)
        if not terminating and np.any(np.abs(arg) >= 1.0):
            worst = float(np.max(np.abs(arg)))
            raise SpecialFunctionDomainError(
                f'hyp2f1({a}, {b}; {c}; z) series argument |{worst:.6g}| >= 1 '
                f'after {path.value} transformation'
            )
        series, used, ok = _power_series(pa, pb, c, arg, max_terms)
        values[mask] = prefactor * series
        terms_used = max(terms_used, used)
        converged = converged and ok

    applied = chosen if transformed.any() else Transformation.NONE
    diagnostics = SeriesDiagnostics(terms_used=terms_used, transformation=applied,
                                    converged=converged, max_terms=max_terms)
    if not converged:
        raise SeriesConvergenceError(
            f'hyp2f1({a}, {b}; {c}; z) did not converge within {max_terms} terms',
            diagnostics,
        )
    logger.debug('hyp2f1(%g, %g; %g) over %d points: %s', a, b, c, z.size, diagnostics)
    values = values * rgamma(c)
    return (complex(values[0]) if scalar else values), diagnostics
