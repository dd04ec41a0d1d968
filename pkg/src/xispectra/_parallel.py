"""Deterministic replication loops, optionally threaded.

Each replication writes into its own index of a preallocated result slot,
so results are identical for any thread count; only wall time changes.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)


def run_indexed(fn, count: int, threads: int = 1) -> None:
    """Call ``fn(i)`` for i in range(count), possibly across threads.

    ``fn`` must store its own result keyed by ``i``; return values are
    discarded.  Exceptions propagate to the caller.
    """
    if count <= 0:
        return
    threads = max(1, int(threads))
    if threads == 1 or count == 1:
        for i in range(count):
            fn(i)
        return
    with ThreadPoolExecutor(max_workers=min(threads, count)) as pool:
        # materialize to surface the first worker exception
        for _ in pool.map(fn, range(count)):
            pass
