"""
Ordered chunked map over row ranges.

Chunk boundaries depend only on the row count and chunk size, and results come
back in chunk order, so any reduction over them is identical for every thread count.
"""

from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")


def chunk_bounds(n_rows: int, chunk_rows: int) -> list[tuple[int, int]]:
    return [(start, min(start + chunk_rows, n_rows)) for start in range(0, n_rows, chunk_rows)]


def map_chunks(
    fn: Callable[[int, int], T],
    n_rows: int,
    chunk_rows: int,
    threads: int = 1,
) -> list[T]:
    """Apply `fn(start, stop)` to consecutive row ranges; results are in row order."""
    bounds = chunk_bounds(n_rows, chunk_rows)
    if threads <= 1 or len(bounds) <= 1:
        return [fn(start, stop) for start, stop in bounds]
    # numpy releases the GIL inside BLAS calls, which is where the work is.
    with ThreadPoolExecutor(max_workers=min(threads, len(bounds))) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
