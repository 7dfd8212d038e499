import click
from flask import Blueprint

from svd_pinns.commands.common import load_run_config, reported_errors, run_options
from svd_pinns.services import sweep as sweep_service

sweep_bp = Blueprint("sweep", __name__, cli_group=None)


@sweep_bp.cli.command("sweep")
@run_options
@click.option(
    "--theta0",
    "theta0_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Pretrained checkpoint; pretrains into output_dir when omitted and missing.",
)
@reported_errors
def sweep(config_path, overrides, theta0_path):
    """Run every mode/optimizer/learning-rate/epsilon cell and write summary.csv."""
    config = load_run_config(config_path, overrides)
    rows = sweep_service.run_sweep(config, theta0_path)
    for row in rows:
        if row["status"] == "success":
            click.echo(f"{row['cell']}: final {row['final_rel_err']:.6e} best {row['best_rel_err']:.6e}")
        else:
            click.echo(f"{row['cell']}: {row['status']} ({row['message']})")
