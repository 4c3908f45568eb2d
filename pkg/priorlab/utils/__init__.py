from priorlab.utils.formatter import Formatter, formatter
from priorlab.utils.loguru_logger import initialize_logger

__all__ = ["Formatter", "formatter", "initialize_logger"]
