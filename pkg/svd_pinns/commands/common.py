import functools

import click
from flask import current_app

from svd_pinns.config.run_config import RunConfig
from svd_pinns.exceptions import (
    CheckpointError,
    ConfigurationError,
    SvdPinnsError,
    TrainingDivergedError,
)


def run_options(command):
    """Add ``--config`` and repeatable ``--set key=value`` to a command."""
    command = click.option(
        "--set",
        "overrides",
        multiple=True,
        metavar="KEY=VALUE",
        help="Override a config key (repeatable).",
    )(command)
    command = click.option(
        "--config",
        "config_path",
        type=click.Path(dir_okay=False),
        default=None,
        help="key=value run file with # comments.",
    )(command)
    return command


def load_run_config(config_path, overrides) -> RunConfig:
    try:
        return RunConfig.from_file(
            config_path, overrides, output_root=current_app.config["OUTPUT_ROOT"]
        )
    except ConfigurationError as e:
        raise click.UsageError(str(e))


def reported_errors(command):
    """Turn toolkit errors into click errors with a readable message."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ConfigurationError as e:
            raise click.UsageError(str(e))
        except TrainingDivergedError as e:
            last = e.last_record
            detail = (
                f" (last good record: iter {last.iteration}, loss {last.loss.total:.6e}, "
                f"rel_err {last.relative_error:.6e})"
                if last is not None
                else ""
            )
            current_app.logger.error(f"{e}{detail}")
            raise click.ClickException(f"{e}{detail}")
        except (CheckpointError, OSError) as e:
            current_app.logger.error(str(e))
            raise click.ClickException(str(e))
        except SvdPinnsError as e:
            raise click.ClickException(f"{type(e).__name__}: {e}")

    return wrapper
