"""Evaluate independent scan points, optionally across worker processes."""

import logging
import time
from concurrent.futures import ProcessPoolExecutor

from spdcfocus import get_settings

logger = logging.getLogger(__name__)


def resolve_workers(workers=None):
    """Worker count from the argument or the active configuration, at least 1."""
    if workers is None:
        workers = get_settings().WORKERS
    return max(1, int(workers))


def run_sweep(func, items, workers=None, label='sweep'):
    """``[func(item) for item in items]`` in item order.

    ``func`` must be picklable (a module-level function or a
    ``functools.partial`` of one) when more than one worker is used.
    """
    items = list(items)
    workers = min(resolve_workers(workers), max(1, len(items)))
    started = time.perf_counter()
    logger.info('Starting %s: %d points on %d worker(s)', label, len(items), workers)

    if workers == 1:
        results = [func(item) for item in items]
    else:
        chunksize = max(1, len(items) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(func, items, chunksize=chunksize))

    logger.info('Finished %s: %d points in %.2f s', label, len(items), time.perf_counter() - started)
    return results
