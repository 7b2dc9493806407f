"""Order-stable process pool map."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items, jobs: int = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over ``jobs`` processes.

    ``Executor.map`` yields in submission order, so the result never depends
    on completion order.
    """
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))
