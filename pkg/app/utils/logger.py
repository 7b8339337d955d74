import os
import logging
from datetime import datetime, date
from logging.handlers import BaseRotatingHandler
from typing import Optional

_LOGGING_INITIALIZED = False

LOG_FORMAT = "%(asctime)s %(levelname)s [%(name)s:%(lineno)d] %(message)s"


class DailyRotatingFileHandler(BaseRotatingHandler):
    def __init__(self, log_dir="logs", retention_days=30, encoding="utf-8"):
        self.log_dir = log_dir
        self.retention_days = retention_days
        os.makedirs(log_dir, exist_ok=True)

        self.current_date = date.today()
        log_filename = self._get_log_filename(self.current_date)

        super().__init__(log_filename, mode="a", encoding=encoding, delay=False)

    def _get_log_filename(self, day: date):
        return os.path.join(self.log_dir, f"{day.strftime('%Y-%m-%d')}.log")

    def shouldRollover(self, record):
        # rollover if the date has changed
        return date.today() != self.current_date

    def doRollover(self):
        if self.stream:
            self.stream.close()
        self.current_date = date.today()
        self.baseFilename = os.path.abspath(self._get_log_filename(self.current_date))
        self.stream = self._open()
        self.cleanup_old_logs()

    def cleanup_old_logs(self):
        now = datetime.now()
        for filename in os.listdir(self.log_dir):
            if filename.endswith(".log"):
                file_path = os.path.join(self.log_dir, filename)
                try:
                    file_time = datetime.fromtimestamp(os.path.getmtime(file_path))
                    if (now - file_time).days > self.retention_days:
                        os.remove(file_path)
                        logging.info(f"Deleted old log file: {file_path}")
                except OSError as e:
                    logging.error(f"Error deleting log file {file_path}: {e}")


def setup_logging(
    log_dir: str = "logs",
    retention_days: int = 30,
    level: str = "INFO",
    to_file: bool = True,
    stream=None,
):
    """Install console (stderr) and daily file handlers on the root logger, once per process."""
    global _LOGGING_INITIALIZED
    if _LOGGING_INITIALIZED:
        return

    root_logger = logging.getLogger()
    if root_logger.handlers:
        root_logger.handlers.clear()

    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        numeric_level = logging.INFO
    formatter = logging.Formatter(LOG_FORMAT)

    if to_file:
        handler = DailyRotatingFileHandler(log_dir=log_dir, retention_days=retention_days)
        handler.setLevel(numeric_level)
        handler.setFormatter(formatter)
        root_logger.addHandler(handler)

    # stdout stays reserved for command results
    console_handler = logging.StreamHandler(stream)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    root_logger.setLevel(numeric_level)

    # numba's compiler logs at DEBUG/INFO through its own loggers
    logging.getLogger("numba").setLevel(logging.WARNING)

    logging.captureWarnings(True)

    _LOGGING_INITIALIZED = True


def reset_logging(level: Optional[int] = None):
    """Drop installed handlers so the next setup_logging call reconfigures."""
    global _LOGGING_INITIALIZED
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        handler.close()
        root_logger.removeHandler(handler)
    if level is not None:
        root_logger.setLevel(level)
    _LOGGING_INITIALIZED = False
