import logging
import time

logger = logging.getLogger(__name__)


class Timer:
    """
    Wall-clock seconds of a block.  With `seconds` (a dict) the duration is
    also stored under `key`, adding to what an earlier block stored there.
    """
    def __init__(self, key = None, seconds = None):
        self.key      = key
        self.seconds  = seconds
        self.duration = None

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start
        if self.seconds is not None:
            self.seconds[self.key] = self.seconds.get(self.key, 0.0) + self.duration
        if self.key is not None:
            logger.debug(f"{self.key}: {self.duration:.3f} s")
