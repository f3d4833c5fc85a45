"""
Structured logging for the IGFT desk trainer.

Every record is a message followed by ``key=value`` context. Records go to
stderr through a rich handler; stdout belongs to transcripts and tables.
"""
import logging
from typing import Any, Dict, Mapping

from rich.console import Console
from rich.logging import RichHandler

_FORMAT = "%(name)s - %(message)s"


def format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render(message: str, context: Mapping[str, Any]) -> str:
    """``message | k1=v1 | k2=v2``; floats are shortened to six significant digits."""
    if not context:
        return message
    return " | ".join([message] + [f"{key}={format_value(value)}" for key, value in context.items()])


class StructuredLogger:
    """Logger that takes its context as keyword arguments.

    Levels and handlers live on the root logger (see ``setup_logging``).
    """

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def debug(self, message: str, **context: Any) -> None:
        if self.logger.isEnabledFor(logging.DEBUG):
            self.logger.debug(render(message, context))

    def info(self, message: str, **context: Any) -> None:
        self.logger.info(render(message, context))

    def warning(self, message: str, **context: Any) -> None:
        self.logger.warning(render(message, context))

    def error(self, message: str, **context: Any) -> None:
        self.logger.error(render(message, context))

    def exception(self, message: str, **context: Any) -> None:
        """Error record with the active traceback attached."""
        self.logger.exception(render(message, context))


_loggers: Dict[str, StructuredLogger] = {}


def get_logger(name: str) -> StructuredLogger:
    if name not in _loggers:
        _loggers[name] = StructuredLogger(name)
    return _loggers[name]


def setup_logging(config_service) -> RichHandler:
    """Install a single stderr handler on the root logger at the configured level."""
    level = logging.getLevelName(config_service.get_log_level().upper())
    if not isinstance(level, int):
        level = logging.INFO

    handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter(_FORMAT))

    root = logging.getLogger()
    for existing in [h for h in root.handlers if isinstance(h, RichHandler)]:
        root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(level)
    return handler
