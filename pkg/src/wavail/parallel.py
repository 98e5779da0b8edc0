"""Deterministic fan-out over independent work items.

Work items are pure functions of their inputs, so they can run on any
number of threads; results are always collected in submission order, which
keeps every downstream reduction independent of scheduling.  The
``WAVAIL_THREADS`` environment variable caps the pool size (0 = auto).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

THREADS_ENV = "WAVAIL_THREADS"
_AUTO_CAP = 8

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: int | None = None) -> int:
    """Resolve the worker count from the argument or the environment."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0").strip()
        try:
            requested = int(raw) if raw else 0
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError(f"worker count must be >= 0, got {requested}")
    if requested == 0:
        return min(_AUTO_CAP, os.cpu_count() or 1)
    return requested


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Apply ``fn`` to every item, returning results in input order."""
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
