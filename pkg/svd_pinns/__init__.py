import logging

from flask import Flask


def create_app(config_name="DevelopmentConfig"):
    # Create Flask app
    app = Flask(__name__)

    # Load configuration
    if config_name == "DevelopmentConfig":
        from svd_pinns.config.development import DevelopmentConfig

        config = DevelopmentConfig
    elif config_name == "TestConfig":
        from svd_pinns.config.test import TestConfig

        config = TestConfig
    elif config_name == "ProductionConfig":
        from svd_pinns.config.production import ProductionConfig

        config = ProductionConfig
    else:
        raise ValueError(
            f"Unsupported config {config_name!r}. Use DevelopmentConfig, TestConfig or ProductionConfig."
        )

    app.config.from_object(config)

    # app.logger is named after the package, so services share its handlers
    app.logger.setLevel(getattr(logging, app.config["LOG_LEVEL"], logging.INFO))

    # Initialize storage and run-log services
    from svd_pinns.services.checkpoint_storage import CheckpointStorageService
    from svd_pinns.services.run_log import RunLogService

    app.checkpoint_storage = CheckpointStorageService()
    app.run_logs = RunLogService()

    # Register command blueprints
    from svd_pinns.commands import register_blueprints

    register_blueprints(app)

    # Initialize Celery
    from svd_pinns.celery_app import make_celery

    celery = make_celery(app)
    app.celery = celery

    return app
