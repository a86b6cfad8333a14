from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence, TypeVar

R = TypeVar("R")


def map_ordered(fn: Callable[..., R], calls: Sequence[tuple[Any, ...]], workers: int = 1) -> list[R]:
    """``[fn(*args) for args in calls]``, on a process pool when ``workers > 1``; order is kept."""
    if workers <= 1 or len(calls) <= 1:
        return [fn(*args) for args in calls]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*calls)))
