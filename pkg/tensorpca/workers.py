"""Bounded worker pool for independent trials.

Tasks run through asyncio.to_thread behind a semaphore, so at most `threads`
tasks (and their tensors) are alive at once. Results come back in task order,
whatever order the workers finish in.
"""
from __future__ import annotations

import asyncio
import logging
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


async def _gather_bounded(fn: Callable[[T], R], tasks: Sequence[T], threads: int) -> List[R]:
    sem = asyncio.Semaphore(max(1, threads))

    async def one(task: T) -> R:
        async with sem:
            return await asyncio.to_thread(fn, task)

    return list(await asyncio.gather(*(one(t) for t in tasks)))


def map_tasks(fn: Callable[[T], R], tasks: Sequence[T], threads: int = 1) -> List[R]:
    """Apply fn to every task; threads=1 runs inline without an event loop."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    logger.debug("[workers] %d tasks on %d threads", len(tasks), threads)
    return asyncio.run(_gather_bounded(fn, tasks, threads))
