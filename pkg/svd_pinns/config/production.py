import os

from .base import BaseConfig


class ProductionConfig(BaseConfig):
    DEBUG = False
    TESTING = False

    STORAGE_TYPE = os.environ.get("STORAGE_TYPE", "s3")
    SWEEP_EXECUTOR = os.environ.get("SWEEP_EXECUTOR", "celery")
