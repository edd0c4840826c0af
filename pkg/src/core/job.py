import logging
import time
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from typing import Callable, Iterable, List, TypeVar

from src.core.config import settings

# Create a logger object for solver runs
solver_logger = logging.getLogger("Solver")
solver_logger.setLevel(getattr(logging, settings.LOG_LEVEL, logging.WARNING))
handler = logging.StreamHandler()
formatter = logging.Formatter(
    "\033[92m%(levelname)s\033[0m: %(asctime)s %(name)s %(message)s"
)
handler.setFormatter(formatter)
solver_logger.addHandler(handler)
solver_logger.propagate = False

T = TypeVar("T")
R = TypeVar("R")


def set_log_level(level: str) -> None:
    solver_logger.setLevel(getattr(logging, level.upper(), logging.WARNING))


def job_log(job_step_name: str):
    """Log start, end and wall time of a command step; failures are logged and re-raised."""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            solver_logger.info(f"Step {job_step_name} started.")
            start = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                solver_logger.error(f"Step {job_step_name} failed with error: {e}")
                raise
            elapsed = time.perf_counter() - start
            solver_logger.info(
                f"Step {job_step_name} finished successfully in {elapsed:.3f} s."
            )
            return result

        return wrapper

    return decorator


def map_ordered(
    func: Callable[[T], R], items: Iterable[T], max_workers: int = None
) -> List[R]:
    """Apply func to every item concurrently and return results in input order."""
    items = list(items)
    max_workers = max_workers or settings.MAX_WORKERS
    if max_workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(func, items))
