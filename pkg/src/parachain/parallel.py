"""Order-preserving parallel map used by sweeps."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    env = os.environ.get("PARACHAIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def ordered_map(func, items, threads: int | None = None) -> list:
    """``[func(x) for x in items]`` evaluated on a thread pool.

    Results come back in input order whatever the worker count, so output
    built from them is independent of scheduling.  LAPACK calls release the
    GIL, which is where the time goes.
    """
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
