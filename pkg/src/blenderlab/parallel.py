"""Deterministic data-parallel helpers.

Results are always returned in input order, so the outcome of a sweep does
not depend on how many workers computed it.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "BLENDERLAB_WORKERS"


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: the environment variable wins over ``requested``."""
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        return max(1, n)
    return max(1, int(requested or 1))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=1))


def chunked(seq: Sequence[T], n: int) -> list[list[T]]:
    return [list(seq[i:i + n]) for i in range(0, len(seq), n)]
