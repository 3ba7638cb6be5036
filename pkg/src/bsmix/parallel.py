"""Seed-level parallelism, capped by the BSMIX_THREADS environment variable.

Runs are independently seeded, so executing them concurrently cannot change
any output; results always come back in submission order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

__all__ = ["thread_count", "run_jobs"]

T = TypeVar("T")


def thread_count() -> int:
    """Worker cap from BSMIX_THREADS (default 1 = sequential)."""
    raw = os.environ.get("BSMIX_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"BSMIX_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError("BSMIX_THREADS must be >= 1")
    return n


def run_jobs(jobs: Sequence[Callable[[], T]]) -> list[T]:
    """Execute zero-argument jobs, in order, with at most thread_count workers."""
    workers = thread_count()
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]
