"""
Logging Configuration

Console, rotating-file and JSON-lines logging for the simulator CLI. Library
modules under sarsched only attach a NullHandler to their module loggers; the
handlers configured here on the "sarsched" logger pick their records up through
propagation.
"""

import logging
import logging.handlers
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Any, Optional
from enum import Enum

from config.config import settings


class LogLevel(Enum):
    """Logging level enumeration for cleaner configuration."""
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


# LogRecord attributes that are not user-supplied context.
_RESERVED_ATTRS = frozenset([
    "name", "msg", "args", "created", "filename", "funcName", "levelname",
    "levelno", "lineno", "module", "msecs", "pathname", "process",
    "processName", "relativeCreated", "thread", "threadName", "exc_info",
    "exc_text", "stack_info", "taskName", "message", "asctime",
])


class StructuredFormatter(logging.Formatter):
    """
    Outputs one JSON object per record so training and sweep logs can be
    loaded back with pandas.read_json(lines=True).
    """

    def format(self, record: logging.LogRecord) -> str:
        log_data = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
            "message": record.getMessage(),
            "process_id": os.getpid(),
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        # Extra fields passed through LogContext or extra={...}
        for key, value in record.__dict__.items():
            if key not in _RESERVED_ATTRS:
                log_data[key] = value

        return json.dumps(log_data, default=str)


class ColoredFormatter(logging.Formatter):
    """
    Formatter that adds color to console output for better readability.
    """

    COLORS = {
        'DEBUG': '\033[36m',     # Cyan
        'INFO': '\033[32m',      # Green
        'WARNING': '\033[33m',   # Yellow
        'ERROR': '\033[31m',     # Red
        'CRITICAL': '\033[35m',  # Magenta
    }
    RESET = '\033[0m'

    def format(self, record: logging.LogRecord) -> str:
        levelname = record.levelname
        record.levelname = f"{self.COLORS.get(levelname, self.RESET)}{levelname}{self.RESET}"
        try:
            return super().format(record)
        finally:
            record.levelname = levelname


_TEXT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class LoggingConfig:
    """
    Centralized logging configuration manager. Console output is always
    available; file and JSON handlers are enabled from Settings or arguments.
    """

    def __init__(self,
                 app_name: str = "sarsched",
                 log_dir: str = "./logs",
                 enable_console: bool = True,
                 enable_file: bool = False,
                 enable_json: bool = False,
                 log_level: Optional[str] = None,
                 max_bytes: int = 20 * 1024 * 1024,  # 20MB
                 backup_count: int = 5,
                 enable_color: bool = True):

        self.app_name = app_name
        self.log_dir = Path(log_dir)
        self.enable_console = enable_console
        self.enable_file = enable_file
        self.enable_json = enable_json
        self.max_bytes = max_bytes
        self.backup_count = backup_count
        self.enable_color = enable_color and sys.stdout.isatty()
        self.log_level = self._get_log_level(log_level)

        if self.enable_file or self.enable_json:
            self.log_dir.mkdir(parents=True, exist_ok=True)

        self._handlers: Dict[str, logging.Handler] = {}

    def _get_log_level(self, log_level: Optional[str]) -> int:
        """Get log level from parameter or Settings, falling back to INFO."""
        level_str = log_level or settings.LOG_LEVEL
        try:
            return LogLevel[level_str.upper()].value
        except KeyError:
            return LogLevel.INFO.value

    def _create_console_handler(self) -> logging.StreamHandler:
        handler = logging.StreamHandler(sys.stdout)
        formatter_cls = ColoredFormatter if self.enable_color else logging.Formatter
        handler.setFormatter(formatter_cls(_TEXT_FORMAT, datefmt=_DATE_FORMAT))
        handler.setLevel(self.log_level)
        return handler

    def _rotating_handler(self, filename: str) -> logging.handlers.RotatingFileHandler:
        return logging.handlers.RotatingFileHandler(
            filename=str(self.log_dir / filename),
            maxBytes=self.max_bytes,
            backupCount=self.backup_count,
            encoding='utf-8'
        )

    def _create_file_handler(self) -> logging.Handler:
        handler = self._rotating_handler(f"{self.app_name}.log")
        handler.setFormatter(logging.Formatter(_TEXT_FORMAT, datefmt=_DATE_FORMAT))
        handler.setLevel(self.log_level)
        return handler

    def _create_error_handler(self) -> logging.Handler:
        """Dedicated error log so aborted training runs are easy to find."""
        handler = self._rotating_handler(f"{self.app_name}_errors.log")
        handler.setFormatter(logging.Formatter(_TEXT_FORMAT, datefmt=_DATE_FORMAT))
        handler.setLevel(logging.ERROR)
        return handler

    def _create_json_handler(self) -> logging.Handler:
        handler = self._rotating_handler(f"{self.app_name}_json.log")
        handler.setFormatter(StructuredFormatter())
        handler.setLevel(self.log_level)
        return handler

    def setup_logger(self, logger_name: Optional[str] = None) -> logging.Logger:
        """
        Set up and configure a logger with the enabled handlers.

        Args:
            logger_name: Name of the logger (defaults to app_name)

        Returns:
            Configured logger instance
        """
        logger_name = logger_name or self.app_name
        logger = logging.getLogger(logger_name)
        logger.setLevel(self.log_level)

        # Clear existing handlers to prevent duplicates on re-configuration
        for handler in list(logger.handlers):
            if not isinstance(handler, logging.NullHandler):
                logger.removeHandler(handler)

        if self.enable_console:
            self._handlers['console'] = self._create_console_handler()
        if self.enable_file:
            self._handlers['file'] = self._create_file_handler()
            self._handlers['error'] = self._create_error_handler()
        if self.enable_json:
            self._handlers['json'] = self._create_json_handler()

        for handler in self._handlers.values():
            logger.addHandler(handler)

        logger.propagate = False
        return logger

    def get_logger(self, name: str) -> logging.Logger:
        """Child logger of the application logger, e.g. get_logger("sweep")."""
        return logging.getLogger(f"{self.app_name}.{name}")

    def shutdown(self):
        """Flush and close every handler; file handlers reopen on the next record."""
        for handler in self._handlers.values():
            handler.flush()
            handler.close()


class LogContext:
    """Helper class for adding structured context to log messages."""

    @staticmethod
    def with_context(logger: logging.Logger, **kwargs) -> logging.LoggerAdapter:
        """
        Add extra context to log messages.

        Example:
            LogContext.with_context(logger, iteration=12, seed=0).info("Iteration done")
        """
        return _ContextAdapter(logger, kwargs)


class _ContextAdapter(logging.LoggerAdapter):
    def process(self, msg: Any, kwargs: Dict[str, Any]):
        extra = dict(self.extra)
        extra.update(kwargs.get('extra', {}))
        kwargs['extra'] = extra
        return msg, kwargs


def setup_logging(app_name: str = "sarsched", **kwargs) -> LoggingConfig:
    """
    Setup logging from Settings; keyword arguments override individual options.

    Returns the configuration; its application logger is already set up.
    """
    config = LoggingConfig(
        app_name=app_name,
        log_dir=kwargs.get('log_dir', settings.LOG_DIR),
        enable_file=kwargs.get('enable_file', settings.LOG_TO_FILE),
        enable_json=kwargs.get('enable_json', settings.LOG_JSON),
        log_level=kwargs.get('log_level'),
        enable_color=kwargs.get('enable_color', True),
    )
    config.setup_logger()
    return config


# Default application logging
logging_config = setup_logging()
logger = logging.getLogger(logging_config.app_name)
