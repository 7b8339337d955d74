"""
Shared fixtures
"""
import numpy as np
import pytest

from app.config import settings
from app.utils.logger import reset_logging


@pytest.fixture(autouse=True)
def no_log_files(monkeypatch):
    """Keep test runs from writing daily log files"""
    monkeypatch.setattr(settings, "LOG_TO_FILE", False)
    yield
    reset_logging()


@pytest.fixture
def rng():
    return np.random.default_rng(7)
