import time
from contextlib import contextmanager

from ..core.logger import get_logger

logger = get_logger(__name__)


@contextmanager
def timer(name: str = "task"):
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        logger.info(f"{name} took {elapsed:.2f}s")
