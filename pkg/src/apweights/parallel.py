"""Ordered parallel map with a process-wide worker cap."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional

_threads = 1


def set_threads(n: Optional[int]) -> int:
    """Cap worker threads (None or 0 means one per CPU). Results never depend on it."""
    global _threads
    _threads = max(1, int(n) if n else (os.cpu_count() or 1))
    return _threads


def get_threads() -> int:
    return _threads


def pmap(fn: Callable, items: Iterable, threads: Optional[int] = None) -> list:
    items = list(items)
    n = get_threads() if threads is None else max(1, threads)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))
