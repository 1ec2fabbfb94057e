"""
Order-preserving evaluation over an optional thread pool.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from triphoton.core.config import settings

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(func: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """Results in input order whatever the schedule"""
    if settings.MAX_WORKERS > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=settings.MAX_WORKERS) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]
