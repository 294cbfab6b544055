"""Optional thread-level parallelism, capped by TROPOCONE_THREADS.

All engine computations are pure, so per-item work may be farmed out to a
thread pool; with the default cap of 1 everything runs inline.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap():
    try:
        return max(1, int(os.environ.get("TROPOCONE_THREADS", "1")))
    except ValueError:
        return 1


def parallel_map(fn, items):
    items = list(items)
    cap = thread_cap()
    if cap <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cap) as pool:
        return list(pool.map(fn, items))
