import logging
import sys

from termcolor import colored

__all__ = ['get_logger', 'set_quiet', 'is_quiet']

_COLORS = {
    logging.DEBUG: 'blue',
    logging.INFO: 'green',
    logging.WARNING: 'yellow',
    logging.ERROR: 'red',
    logging.CRITICAL: 'red',
}

_QUIET = False


class ColorFormatter(logging.Formatter):
    """Prefix each record with a coloured level name."""

    def format(self, record):
        level = colored(f'{record.levelname:<7}', _COLORS.get(record.levelno, 'white'))
        return f'{level} {record.name}: {record.getMessage()}'


def get_logger(name: str = 'spikeslab') -> logging.Logger:
    """Return the package logger, attaching the console handler once.

    Args:
        name (str): logger name; children of 'spikeslab' share its handler

    Returns:
        logging.Logger: configured logger
    """
    root = logging.getLogger('spikeslab')
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ColorFormatter())
        root.addHandler(handler)
        root.setLevel(logging.WARNING if _QUIET else logging.INFO)
        root.propagate = False
    return logging.getLogger(name)


def set_quiet(quiet: bool):
    """Raise the package log level to WARNING and silence progress bars."""
    global _QUIET
    _QUIET = quiet
    get_logger().setLevel(logging.WARNING if quiet else logging.INFO)


def is_quiet() -> bool:
    return _QUIET
