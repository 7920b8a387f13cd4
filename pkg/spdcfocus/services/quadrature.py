"""Adaptive Gauss-Legendre quadrature for smooth, oscillatory integrands."""

import logging
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from spdcfocus import get_settings
from spdcfocus.exceptions import QuadratureError

logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def legendre_rule(n):
    """Nodes and weights of the n-point rule on [−1, 1]."""
    nodes, weights = roots_legendre(n)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def mapped_rule(n, lower, upper):
    """The n-point rule mapped onto [lower, upper]."""
    nodes, weights = legendre_rule(n)
    half = 0.5 * (upper - lower)
    return 0.5 * (upper + lower) + half * nodes, half * weights


def weighted_sum(values, weights):
    values = np.asarray(values)
    return values @ weights, np.abs(values) @ weights


def adaptive_gauss_legendre(integrand, lower, upper, rtol=None, atol=None,
                            initial_nodes=None, max_nodes=None, reducer=weighted_sum):
    """Integrate ``integrand`` over [lower, upper] by doubling the node count.

    ``integrand`` maps a 1-D array of nodes to an array whose last axis runs
    over those nodes, so one call can integrate many related functions at
    once. Every component must settle: successive estimates agree to
    ``rtol`` relative, or to ``atol`` times ∫|f| for components that are
    cancelling towards zero.

    ``reducer(values, weights)`` turns whatever the integrand returned into
    the pair (estimate, ∫|f| estimate); the default handles plain arrays.

    Returns ``(estimate, nodes_used)``.
    """
    settings = get_settings()
    rtol = settings.QUAD_RTOL if rtol is None else rtol
    atol = settings.QUAD_ATOL if atol is None else atol
    n = initial_nodes or settings.QUAD_INITIAL_NODES
    max_nodes = max_nodes or settings.QUAD_MAX_NODES

    estimates = []
    while n <= max_nodes:
        nodes, weights = mapped_rule(n, lower, upper)
        estimate, scale = reducer(integrand(nodes), weights)
        if estimates:
            change = np.abs(estimate - estimates[-1])
            if np.all(change <= np.maximum(rtol * np.abs(estimate), atol * scale)):
                logger.debug('Quadrature converged with %d nodes', n)
                return estimate, n
        estimates.append(estimate)
        n *= 2

    raise QuadratureError(
        f'Gauss-Legendre quadrature did not converge with {max_nodes} nodes',
        estimates=estimates[-2:],
    )
