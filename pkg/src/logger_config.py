"""
Console logger shared by the command line entry points.
"""

import logging
import sys

LOGGER_NAME = "setpointlib"
LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def get_console_logger(level: int = logging.INFO, stream=None) -> logging.Logger:
    """
    Returns the package root logger with a single console handler attached.

    Args:
        level (int): Logging level for the logger and its handler.
        stream: Output stream, stderr by default so that data written to stdout stays clean.

    Returns:
        logging.Logger: Configured logger. Child loggers of `src.*` modules propagate to the root.
    """
    logger = logging.getLogger(LOGGER_NAME)
    if not logger.handlers:
        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        # module loggers live under "src.", route them through the same handler
        logging.getLogger("src").addHandler(handler)
    logger.setLevel(level)
    logging.getLogger("src").setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)
    return logger
