"""Seeded replication fan-out with worker-count-independent results.

Every replication gets the child stream derived from its index, so the
result list is a pure function of (root stream, n) no matter how many
processes run the work. SRW_WORKERS caps parallelism; the default is one
worker, which also sidesteps pickling requirements on the task function.
"""

from __future__ import annotations

import multiprocessing
import os

from .rng import RngStream


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("SRW_WORKERS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"SRW_WORKERS must be an integer, got {env!r}")
    return 1


def run_indexed(fn, n: int, rng: RngStream, workers: int | None = None) -> list:
    """Evaluate fn(i, rng.child(i)) for i in range(n), in index order.

    With more than one worker, fn and its results must be picklable."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    w = resolve_workers(workers)
    tasks = [(i, rng.child(i)) for i in range(n)]
    if w <= 1 or n <= 1:
        return [fn(i, s) for i, s in tasks]
    with multiprocessing.get_context("fork").Pool(w) as pool:
        return pool.starmap(fn, tasks)
