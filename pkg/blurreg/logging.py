"""
Logging setup.

Library modules log through ``loguru.logger``; the package disables them on
import, and ``configure_logging`` re-enables them behind a single sink
(the CLI does this on startup).
"""
import sys
from typing import Optional

from loguru import logger

from .config import get_settings

_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def configure_logging(level: Optional[str] = None, sink=None) -> int:
    """Install a single loguru sink for blurreg messages.

    Args:
        level: Minimum level; defaults to ``Settings.LOG_LEVEL``.
        sink: Where to write; defaults to stderr.

    Returns:
        int: The loguru handler id.
    """
    level = (level or get_settings().LOG_LEVEL).upper()
    logger.remove()
    logger.enable("blurreg")
    return logger.add(sink or sys.stderr, level=level, format=_FORMAT)
