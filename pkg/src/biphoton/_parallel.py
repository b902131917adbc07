"""Thread-pool sizing for the delay-scan hot loops.

The BIPHOTON_THREADS environment variable caps the worker count; the
default keeps one worker per CPU up to four.  All parallel loops map a
pure function over independent delay samples, so ordering is restored
from the submission index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    env = os.environ.get("BIPHOTON_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"BIPHOTON_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError("BIPHOTON_THREADS must be >= 1")
        return n
    return min(4, os.cpu_count() or 1)


def parallel_map(fn, items, threads: int | None = None) -> list:
    """Map ``fn`` over ``items`` preserving order, on up to ``threads``
    workers (thread_count() when None).  Falls back to a plain loop for a
    single worker."""
    if threads is None:
        threads = thread_count()
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
