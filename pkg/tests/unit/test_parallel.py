"""Unit tests for the chunked worker pool"""

from concurrent.futures import Future
from concurrent.futures.process import BrokenProcessPool

import pytest

from src.utils.parallel import map_chunks


def square(x):
    return x * x


def failed_future(error: Exception) -> Future:
    future = Future()
    future.set_exception(error)
    return future


class TestMapChunks:
    """Test ordering and the sequential fallback"""

    def test_sequential(self):
        """Test one thread runs inline and keeps task order"""
        assert map_chunks(square, [3, 1, 2], threads=1) == [9, 1, 4]

    def test_pool_start_failure_falls_back(self, mocker):
        """Test a pool that cannot start is replaced by inline execution with a warning"""
        mocker.patch("src.utils.parallel.ProcessPoolExecutor", side_effect=PermissionError("no semaphores"))
        logger = mocker.patch("src.utils.parallel.logger")
        assert map_chunks(square, [1, 2, 3], threads=2) == [1, 4, 9]
        assert "no semaphores" in logger.warning.call_args.args[0]

    def test_broken_pool_falls_back(self, mocker):
        """Test a pool whose workers died is replaced by inline execution"""
        pool = mocker.patch("src.utils.parallel.ProcessPoolExecutor").return_value
        pool.submit.side_effect = lambda *_: failed_future(BrokenProcessPool("worker died"))
        logger = mocker.patch("src.utils.parallel.logger")
        assert map_chunks(square, [1, 2, 3], threads=2) == [1, 4, 9]
        assert "worker died" in logger.warning.call_args.args[0]

    def test_worker_errors_propagate(self, mocker):
        """Test a failure inside the worker is not mistaken for a pool failure"""
        pool = mocker.patch("src.utils.parallel.ProcessPoolExecutor").return_value
        pool.submit.side_effect = lambda *_: failed_future(RuntimeError("bad chunk"))
        with pytest.raises(RuntimeError, match="bad chunk"):
            map_chunks(square, [1, 2, 3], threads=2)
