from .base import BaseConfig


class TestConfig(BaseConfig):
    DEBUG = True
    TESTING = True
    LOG_LEVEL = "DEBUG"

    STORAGE_TYPE = "local"
    SWEEP_EXECUTOR = "local"

    # Use memory for Celery in tests
    CELERY_BROKER_URL = "memory://"
    CELERY_RESULT_BACKEND = "cache+memory://"
    CELERY_ALWAYS_EAGER = (
        True  # Tasks will be executed locally instead of being sent to the queue
    )
