"""Worker-pool helper honoring the GRIDVEIL_THREADS cap.

Results are always assembled in input order, so parallel execution never
changes output values, only wall-clock time.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    """Configured worker cap; 0 or unset means auto (cpu count)."""
    raw = os.environ.get("GRIDVEIL_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def ordered_map(fn, items):
    """Map preserving input order; parallel only when it can help."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
