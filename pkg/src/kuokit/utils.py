"""Small shared helpers (threading knob)."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

#: environment variable controlling worker threads for per-shell evaluation
THREADS_ENV_VAR = "KUOKIT_THREADS"


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        count = int(raw)
    except ValueError:
        return 1
    return max(count, 1)


def ordered_map(fn, items):
    """Map preserving order; uses a thread pool when KUOKIT_THREADS > 1.

    Work is partitioned deterministically and results are collected in input
    order, so outputs are identical to the sequential path.
    """
    items = list(items)
    workers = thread_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
