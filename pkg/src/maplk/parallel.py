"""Deterministic chunked parallelism for path-indexed Monte Carlo.

Work items are identified by an integer index; each chunk covers a fixed
index range, so partial results are identical whatever the worker count,
and merging in chunk order keeps floating-point accumulation byte-stable.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

_CHUNK = 1024


def map_chunks(fn, n_items, workers=1, *, args, chunk=_CHUNK):
    """Apply ``fn(args, lo, hi)`` over [0, n_items) in fixed chunks.

    Returns the list of per-chunk results in index order.  ``fn`` must be a
    top-level function and ``args`` picklable when workers > 1.
    """
    ranges = [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]
    if workers is None or workers <= 1 or len(ranges) <= 1:
        return [fn(args, lo, hi) for lo, hi in ranges]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        futures = [ex.submit(fn, args, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futures]
