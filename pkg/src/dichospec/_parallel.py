import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "DICHOSPEC_THREADS"


def default_workers():
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def ordered_map(fn, items, workers=None):
    """``list(map(fn, items))`` on a thread pool; result order never depends on ``workers``."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
