"""Order-preserving parallel map over trial indices.

Work items must be pure functions of their index (all randomness derived from
indexed substreams), so the result list is identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

THREADS_ENV_VAR = "OUTBREAK_LOCAL_THREADS"


def resolve_threads(threads: int | None) -> int:
    """Explicit thread count, else the OUTBREAK_LOCAL_THREADS env var, else 1."""
    if threads is not None:
        if threads < 1:
            raise ValueError(f"threads must be >= 1, got {threads}")
        return threads
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def parallel_map(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """[fn(0), ..., fn(count-1)], computed with up to `threads` workers."""
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        return list(pool.map(fn, range(count)))
