"""
    rhopriv._logging
    ~~~~~~~~~~~~~~~~
"""
import logging
import sys
from typing import Optional

BLACK, RED, GREEN, YELLOW, BLUE, MAGENTA, CYAN, WHITE = range(8)

LOGGER_NAME = "rhopriv"

_MARK = "_rhopriv_console"


def create_logger() -> logging.Logger:
    """The package logger, INFO unless configured otherwise, writing
    colored lines to stderr."""
    logger = logging.getLogger(LOGGER_NAME)
    if logger.level == logging.NOTSET:
        logger.setLevel(logging.INFO)

    # every module calls this at import time
    if not any(getattr(h, _MARK, False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(ColoredFormatter())
        setattr(handler, _MARK, True)
        logger.addHandler(handler)
    return logger


def set_debug(debug: bool) -> None:
    create_logger().setLevel(logging.DEBUG if debug else logging.INFO)


def paint(color: int, text: str) -> str:
    return f"\033[1;{30 + color}m{text}\033[0m"


class ColoredFormatter(logging.Formatter):
    """``[time] [LEVEL] message`` with the time in cyan and the level
    in its own color."""

    DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
    LEVEL_COLORS = {
        "DEBUG": BLUE,
        "INFO": GREEN,
        "WARNING": YELLOW,
        "ERROR": RED,
        "CRITICAL": MAGENTA,
    }

    def __init__(
        self, fmt: Optional[str] = None, datefmt: Optional[str] = None
    ) -> None:
        default = f"[{paint(CYAN, '%(asctime)s')}] [%(levelname)s] %(message)s"
        super().__init__(fmt or default, datefmt or self.DATE_FORMAT)

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelname)
        if color is not None:
            # other handlers must still see the plain level name
            record = logging.makeLogRecord(record.__dict__)
            record.levelname = paint(color, record.levelname)
        return super().format(record)
