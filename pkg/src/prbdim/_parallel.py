"""Optional thread fan-out for Monte-Carlo loops.

Results are always written into index-addressed slots, so the outcome is
bit-identical for any worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "PRBDIM_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, n)


def indexed_map(fn, count: int, workers: int | None = None) -> None:
    """Run fn(i) for i in range(count), possibly on a thread pool."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or count <= 1:
        for i in range(count):
            fn(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, range(count)))
