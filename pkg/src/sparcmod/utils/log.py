"""Logging setup for the ``sparcmod`` logger tree."""

import logging
from typing import Optional, Union

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Union[int, str] = logging.WARNING,
                      log_file: Optional[str] = None) -> logging.Logger:
    """Attach handlers to the package logger and return it.

    Calling this twice replaces the handlers installed by the first call.
    """
    if isinstance(level, str):
        numeric = logging.getLevelName(level.upper())
        if not isinstance(numeric, int):
            raise ValueError(f"Unknown log level: {level}")
        level = numeric

    root = logging.getLogger("sparcmod")
    for handler in list(root.handlers):
        if getattr(handler, "_sparcmod", False):
            root.removeHandler(handler)
            handler.close()

    formatter = logging.Formatter(LOG_FORMAT)
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(formatter)
        handler._sparcmod = True  # pylint: disable=protected-access
        root.addHandler(handler)

    root.setLevel(level)
    return root
