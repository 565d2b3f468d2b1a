"""
Logger Utility
==============
Centralized logging configuration for the hybrid pedestrian simulator.

Every module logs through get_logger(__name__). A run directory can collect
the records of all simulator modules in its own log file while the run is
being written (see attach_run_log).
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

from .config import Config

# Parent of every module logger in the package
PACKAGE_LOGGER = "src"

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _level(level: Optional[str]) -> int:
    return getattr(logging, (level or Config.LOG_LEVEL or "INFO").upper(), logging.INFO)


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Get a configured logger instance.

    Args:
        name: Logger name (typically __name__)
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
               If None, uses Config.LOG_LEVEL

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    logger.setLevel(_level(level))

    # Create handler if not already configured
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)

    return logger


def attach_run_log(path: Union[str, Path], level: Optional[str] = None) -> logging.Handler:
    """
    Copy the records of all simulator modules into a file.

    Args:
        path: Log file (truncated if it exists)
        level: Minimum level written; Config.LOG_LEVEL when None

    Returns:
        The file handler, to be passed to detach_run_log
    """
    handler = logging.FileHandler(Path(path), mode="w", encoding="utf-8")
    handler.setLevel(_level(level))
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    # module loggers propagate to the package logger, whatever its own level
    logging.getLogger(PACKAGE_LOGGER).addHandler(handler)
    return handler


def detach_run_log(handler: logging.Handler) -> None:
    """Stop writing to a file attached with attach_run_log and close it."""
    logging.getLogger(PACKAGE_LOGGER).removeHandler(handler)
    handler.close()
