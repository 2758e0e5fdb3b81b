"""Data parallelism capped by the GWM_THREADS environment variable."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from gwm_segment.errors import ConfigError

ENV_THREADS = "GWM_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_thread_count(value: str | None = None) -> int:
    """Number of worker threads to use.

    Args:
        value: Override for the environment value (mainly for tests).

    Returns:
        A positive count; 0 or unset means ``os.cpu_count()``.
    """
    raw = os.environ.get(ENV_THREADS, "0") if value is None else value
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if count < 0:
        raise ConfigError(f"{ENV_THREADS} must be >= 0, got {count}")
    if count == 0:
        count = os.cpu_count() or 1
    return count


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``fn`` to every item, possibly in parallel, keeping input order.

    Results come back in input order, so any reduction over them is done in a
    fixed order regardless of scheduling.
    """
    items = list(items)
    workers = min(resolve_thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
