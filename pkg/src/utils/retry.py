"""
Retry utilities with exponential backoff.

SQLite raises OperationalError ("database is locked") when two processes write the
trace cache at once; writes are retried with tenacity.
"""

import logging

from sqlalchemy.exc import OperationalError
from tenacity import (
    before_sleep_log,
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.utils.logger import logger


def retry_on_database_lock(max_attempts: int = 3, min_wait: float = 0.1, max_wait: float = 2.0):
    """
    Decorator for retrying database writes on lock contention.

    Args:
        max_attempts: Maximum number of attempts
        min_wait: Minimum wait time in seconds
        max_wait: Maximum wait time in seconds

    Returns:
        Tenacity retry decorator

    Example:
        @retry_on_database_lock()
        def store(self, record):
            self.db.add(record)
            self.db.commit()
    """
    return retry(
        stop=stop_after_attempt(max_attempts),
        wait=wait_exponential(multiplier=min_wait, min=min_wait, max=max_wait),
        retry=retry_if_exception_type(OperationalError),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )
