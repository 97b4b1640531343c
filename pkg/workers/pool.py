# workers/pool.py - Drop worker pool
"""
Process pool for independent simulation drops

Drops share no mutable state, so they are mapped over worker processes and the
results are re-ordered by drop index before anything is aggregated.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


def effective_threads(requested: int) -> int:
    """Cap the requested worker count by the available CPUs"""
    available = os.cpu_count() or 1
    return max(1, min(int(requested), available))


def run_drops(fn: Callable[[int], T], indices: Iterable[int], threads: int = 1) -> List[T]:
    """
    Evaluate ``fn(index)`` for every drop index

    Args:
        fn: picklable callable taking a drop index
        indices: drop indices
        threads: worker processes; 1 runs in-process

    Returns:
        Results sorted by drop index
    """
    indices = sorted(indices)
    workers = effective_threads(threads)
    if workers == 1 or len(indices) <= 1:
        return [fn(index) for index in indices]

    logger.info(f"Running {len(indices)} drops on {workers} worker processes")
    results = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, index): index for index in indices}
        for future in as_completed(futures):
            index = futures[future]
            results[index] = future.result()
    return [results[index] for index in indices]
