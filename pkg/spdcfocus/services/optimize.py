"""One-dimensional maximisation, half-maximum widths and line fits."""

import logging

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import linregress

from spdcfocus.exceptions import ConfigError
from spdcfocus.models import LinearFit, OptimumPoint

logger = logging.getLogger(__name__)


def golden_maximize(func, lower, middle, upper, xtol):
    """Golden-section search for a maximum inside the bracket (lower, middle, upper).

    The bracket is mapped onto t ∈ [1, 2] so scipy's relative tolerance
    acts as the absolute ``xtol`` in the original coordinate.
    Returns ``(x, value)``; raises ``ValueError`` when the three points do
    not bracket a maximum.
    """
    span = upper - lower

    def to_x(t):
        return lower + (t - 1.0) * span

    result = minimize_scalar(
        lambda t: -func(to_x(t)),
        bracket=(1.0, 1.0 + (middle - lower) / span, 2.0),
        method='golden',
        options={'xtol': xtol / (3.0 * span)},
    )
    return to_x(result.x), -result.fun


def refine_maximum(func, grid, values, xtol, label='maximum'):
    """Coarse-grid argmax followed by golden-section refinement.

    The refined point is kept only when it beats the best grid sample, so
    the reported value is never below any sampled value.
    """
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    best = int(np.argmax(values))
    if best == 0 or best == len(grid) - 1:
        logger.warning('%s lies on the scan edge at %.6g', label, grid[best])
        return OptimumPoint((float(grid[best]),), float(values[best]), 'edge')
    try:
        x, value = golden_maximize(func, grid[best - 1], grid[best], grid[best + 1], xtol)
    except ConfigError:
        raise
    except ValueError as exc:
        logger.warning('Could not bracket %s near %.6g: %s', label, grid[best], exc)
        return OptimumPoint((float(grid[best]),), float(values[best]), 'bracket-failed')
    if value < values[best]:
        return OptimumPoint((float(grid[best]),), float(values[best]), 'grid')
    return OptimumPoint((float(x),), float(value), 'refined')


def quadratic_offset(f_minus, f_zero, f_plus):
    """Vertex of the parabola through three equally spaced samples, in grid steps."""
    curvature = f_minus - 2.0 * f_zero + f_plus
    if curvature >= 0:
        return 0.0
    return float(np.clip(0.5 * (f_minus - f_plus) / curvature, -0.5, 0.5))


def half_max_width(x, y):
    """Full width at half maximum by linear interpolation, or None.

    None means the curve does not fall below half its maximum on both
    sides of the peak inside the sampled range.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    peak = int(np.argmax(y))
    half = 0.5 * y[peak]

    left = None
    for j in range(peak, 0, -1):
        if y[j - 1] < half <= y[j]:
            left = x[j - 1] + (half - y[j - 1]) * (x[j] - x[j - 1]) / (y[j] - y[j - 1])
            break
    right = None
    for j in range(peak, len(y) - 1):
        if y[j + 1] < half <= y[j]:
            right = x[j] + (y[j] - half) * (x[j + 1] - x[j]) / (y[j] - y[j + 1])
            break
    if left is None or right is None:
        return None
    return float(right - left)


def linear_fit(x, y):
    """Least-squares line through (x, y) with its coefficient of determination."""
    result = linregress(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return LinearFit(slope=float(result.slope), intercept=float(result.intercept),
                     r_squared=float(result.rvalue ** 2))
