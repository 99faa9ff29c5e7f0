import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "STRUCTOPS_THREADS"


def threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    """``map`` that may run on a thread pool; results keep input order."""
    items = list(items)
    k = threads()
    if k == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))
