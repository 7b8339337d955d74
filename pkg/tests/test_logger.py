"""
Unit tests for the logging setup
"""
import io
import logging
import os
import time
from datetime import date, timedelta

from app.utils.logger import DailyRotatingFileHandler, reset_logging, setup_logging


def test_console_and_file_handlers(tmp_path):
    """Test one console and one daily file handler at the requested level"""
    stream = io.StringIO()
    setup_logging(log_dir=str(tmp_path), level="warning", stream=stream)
    logging.getLogger("app.test").warning("kept")
    logging.getLogger("app.test").info("dropped")

    assert "kept" in stream.getvalue()
    assert "dropped" not in stream.getvalue()
    log_file = tmp_path / f"{date.today():%Y-%m-%d}.log"
    assert "kept" in log_file.read_text()


def test_setup_runs_once(tmp_path):
    first, second = io.StringIO(), io.StringIO()
    setup_logging(to_file=False, stream=first)
    setup_logging(to_file=False, stream=second)
    logging.getLogger("app.test").error("once")
    assert "once" in first.getvalue()
    assert second.getvalue() == ""
    reset_logging()
    setup_logging(to_file=False, stream=second)
    logging.getLogger("app.test").error("again")
    assert "again" in second.getvalue()


def test_rollover_cleans_old_logs(tmp_path):
    """Test a date change opens a new file and deletes files past retention"""
    old = tmp_path / "2000-01-01.log"
    old.write_text("stale\n")
    stale = time.time() - 90 * 86400
    os.utime(old, (stale, stale))
    handler = DailyRotatingFileHandler(log_dir=str(tmp_path), retention_days=30)
    try:
        handler.current_date = date.today() - timedelta(days=1)
        record = logging.LogRecord("app.test", logging.INFO, __file__, 1, "msg", None, None)
        assert handler.shouldRollover(record)
        handler.doRollover()
        assert handler.current_date == date.today()
        assert not old.exists()
    finally:
        handler.close()
