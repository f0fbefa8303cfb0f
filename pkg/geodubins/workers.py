"""
Bounded thread pool shared by the numeric modules
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional

from django.conf import settings

logger = logging.getLogger(__name__)


def max_threads() -> int:
    return max(1, int(settings.GEODUBINS_CONFIG['THREADS']))


def parallel_map(fn: Callable, items: Iterable, max_workers: Optional[int] = None) -> List:
    """Map fn over items, preserving order"""
    items = list(items)
    workers = max_workers or max_threads()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
