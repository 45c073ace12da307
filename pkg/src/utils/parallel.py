"""Chunked worker pool with ordered aggregation"""

import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from concurrent.futures.process import BrokenProcessPool
from typing import Any, Callable, List, Sequence

logger = logging.getLogger(__name__)


def map_chunks(worker: Callable[[Any], Any], tasks: Sequence[Any], threads: int = 1) -> List[Any]:
    """Apply a top-level worker function to every task.

    Results come back in task order whatever the completion order was, so a
    reduction over them does not depend on the number of workers. Only a pool
    that cannot start or breaks falls back to sequential execution; errors
    raised by the worker itself propagate.
    """
    if threads <= 1 or len(tasks) <= 1:
        return _run_sequential(worker, tasks)

    executor = None
    try:
        executor = ProcessPoolExecutor(max_workers=min(threads, len(tasks)))
        futures = {executor.submit(worker, task): i for i, task in enumerate(tasks)}
    except OSError as e:
        # sandboxed interpreters without semaphores or fork
        if executor is not None:
            executor.shutdown(wait=False, cancel_futures=True)
        logger.warning(f"Process pool unavailable: {e}. Falling back to sequential execution")
        return _run_sequential(worker, tasks)

    results: List[Any] = [None] * len(tasks)
    with executor:
        try:
            for future in as_completed(futures):
                i = futures[future]
                results[i] = future.result()
                logger.debug(f"Chunk {i + 1}/{len(tasks)} finished")
        except BrokenProcessPool as e:
            logger.warning(f"Process pool broke: {e}. Falling back to sequential execution")
            return _run_sequential(worker, tasks)
    return results


def _run_sequential(worker: Callable[[Any], Any], tasks: Sequence[Any]) -> List[Any]:
    return [_run_inline(worker, i, task, len(tasks)) for i, task in enumerate(tasks)]


def _run_inline(worker: Callable[[Any], Any], i: int, task: Any, total: int) -> Any:
    result = worker(task)
    logger.debug(f"Chunk {i + 1}/{total} finished")
    return result
