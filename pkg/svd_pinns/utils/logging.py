import logging

from flask import current_app, has_app_context

LOGGER_NAME = "svd_pinns"


def get_logger() -> logging.Logger:
    """
    Return the application logger when running inside an app context,
    otherwise the package logger of the same name.

    Flask names its logger after the import name, so both resolve to the
    same handlers once the app has been created.
    """
    if has_app_context():
        return current_app.logger
    return logging.getLogger(LOGGER_NAME)
