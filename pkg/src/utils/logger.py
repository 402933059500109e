"""
Logging setup.

One named logger for the whole package. The CLI moves its console handler to stderr so
stdout carries only results.
"""

import logging
import os
import sys
from typing import Optional, TextIO

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _level(name: Optional[str]) -> int:
    return getattr(logging, (name or os.getenv("LOG_LEVEL", "INFO")).upper(), logging.INFO)


def setup_logger(
    name: str = "embedded_ensembles",
    level: Optional[str] = None,
    log_file: Optional[str] = None,
    stream: Optional[TextIO] = None,
) -> logging.Logger:
    """
    Configure and return a logger instance.

    Args:
        name: Logger name
        level: DEBUG, INFO, WARNING, ERROR or CRITICAL; LOG_LEVEL, then INFO, when omitted
        log_file: Optional file that receives the same records
        stream: Console stream (default: stdout)

    Returns:
        The logger, unchanged apart from its level if it already has handlers
    """
    log = logging.getLogger(name)
    log.setLevel(_level(level))
    if log.handlers:
        return log

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers: list[logging.Handler] = [logging.StreamHandler(stream or sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    for handler in handlers:
        handler.setLevel(log.level)
        handler.setFormatter(formatter)
        log.addHandler(handler)
    return log


def route_console_to(stream: TextIO, level: Optional[str] = None) -> None:
    """Point the console handler at another stream, optionally changing the level."""
    for handler in logger.handlers:
        # FileHandler subclasses StreamHandler
        if type(handler) is logging.StreamHandler:
            handler.setStream(stream)
    if level:
        logger.setLevel(_level(level))
        for handler in logger.handlers:
            handler.setLevel(logger.level)


logger = setup_logger(log_file=os.getenv("LOG_FILE") or None)
