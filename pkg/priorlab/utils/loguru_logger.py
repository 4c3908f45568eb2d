import os
import sys
from pathlib import Path
from typing import Optional, Union

from loguru import logger

_FILE_SINKS: dict = {}


def initialize_logger(
    log_folder: Union[str, Path] = "logs",
    level: Optional[str] = None,
):
    """Attach a file sink under ``log_folder`` and a stderr sink.

    Safe to call repeatedly: each folder gets exactly one file sink,
    and the stderr sink is replaced so the level can change between
    runs of the same process.

    Args:
        log_folder: Directory receiving ``priorlab.log``.
        level: Minimum level; defaults to ``PRIORLAB_LOG_LEVEL`` or INFO.

    Returns:
        The configured loguru logger.
    """
    level = level or os.getenv("PRIORLAB_LOG_LEVEL", "INFO")
    folder = Path(log_folder)
    folder.mkdir(parents=True, exist_ok=True)

    if "stderr" in _FILE_SINKS:
        logger.remove(_FILE_SINKS["stderr"])
    else:
        # drop loguru's default handler once
        logger.remove()
    _FILE_SINKS["stderr"] = logger.add(
        sys.stderr, level=level, colorize=True
    )

    key = str(folder.resolve())
    if key not in _FILE_SINKS:
        _FILE_SINKS[key] = logger.add(
            folder / "priorlab.log",
            level=level,
            backtrace=True,
            diagnose=True,
            enqueue=True,
            retention="10 days",
        )
    return logger
