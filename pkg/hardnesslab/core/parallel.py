import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

from hardnesslab.core.config import settings

logger = logging.getLogger("hardnesslab.parallel")

T = TypeVar("T")


def chunk_bounds(total: int, chunk_size: int) -> List[tuple]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    return [(start, min(start + chunk_size, total)) for start in range(0, total, chunk_size)]


def map_chunks(
    fn: Callable[[int, int], Sequence[T]],
    total: int,
    workers: int = 1,
    chunk_size: int = 0,
) -> List[T]:
    """Evaluate ``fn(start, stop)`` over fixed chunks of ``range(total)``.

    Chunk boundaries depend only on ``total`` and ``chunk_size``, and results
    are concatenated in chunk order, so the output is the same for any worker
    count. ``fn`` must be picklable when ``workers > 1``.
    """
    bounds = chunk_bounds(total, chunk_size or settings.CHUNK_SIZE)
    results: List[T] = []
    if workers <= 1 or len(bounds) <= 1:
        for start, stop in bounds:
            results.extend(fn(start, stop))
        return results

    logger.debug("dispatching %d chunks to %d workers", len(bounds), workers)
    starts = [b[0] for b in bounds]
    stops = [b[1] for b in bounds]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(fn, starts, stops):
            results.extend(part)
    return results
