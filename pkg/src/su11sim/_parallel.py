import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "SU11_SIM_THREADS"


def max_workers() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, items):
    """``list(map(fn, items))`` on a thread pool; result order follows ``items``."""
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
