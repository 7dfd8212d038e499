import os

from .base import BaseConfig


class DevelopmentConfig(BaseConfig):
    DEBUG = True
    TESTING = False

    # per-iteration progress lines are logged at DEBUG
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "DEBUG").upper()
