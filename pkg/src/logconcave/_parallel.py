"""Deterministic thread-pool helpers.

Work is split into a fixed sequence of items and results are merged in item
order, so outputs never depend on the number of workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

THREADS_ENV = "LOGCONCAVE_THREADS"


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(func: Callable, items: Iterable, threads: int | None = None) -> list:
    """``[func(x) for x in items]``, optionally evaluated on a thread pool."""
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
