from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List

from .log import get_logger

__all__ = ['parallel_map']

logger = get_logger(__name__)


def parallel_map(fn: Callable, items: Iterable, workers: int = 1) -> List:
    """Apply fn to every item, returning results in input order.

    With more than one worker the calls run in a process pool, so fn and the
    items must be picklable. Results are independent of the worker count as
    long as fn draws its randomness from seeds carried by the items.

    Args:
        fn (Callable): function of one argument
        items (Iterable): arguments
        workers (int): pool size; 1 or less runs serially

    Returns:
        list: fn(item) for each item, in order
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(workers, len(items))
    logger.debug(f'Mapping {len(items)} items over {workers} processes')
    chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
