import click
from flask import Blueprint

from svd_pinns.commands.common import load_run_config, reported_errors, run_options
from svd_pinns.services import experiment

training_bp = Blueprint("training", __name__, cli_group=None)


@training_bp.cli.command("pretrain")
@run_options
@reported_errors
def pretrain(config_path, overrides):
    """Pretrain at epsilon = 0; writes theta0.ckpt and pretrain.csv."""
    config = load_run_config(config_path, overrides)
    artifacts = experiment.run_pretrain(config)
    click.echo(f"checkpoint: {artifacts.checkpoint}")
    click.echo(f"log: {artifacts.log}")
    click.echo(f"final rel_err: {artifacts.final_rel_err:.6e}")


@training_bp.cli.command("transfer")
@run_options
@click.option(
    "--theta0",
    "theta0_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Pretrained checkpoint (default: <output_dir>/theta0.ckpt).",
)
@reported_errors
def transfer(config_path, overrides, theta0_path):
    """
    Transfer theta0 to the configured epsilon and mode; writes
    theta_eps<eps>.ckpt, run_eps<eps>.csv and, for svd_transfer, basis.svd.
    """
    config = load_run_config(config_path, overrides)
    theta0 = experiment.load_theta0(config, theta0_path)
    artifacts = experiment.run_transfer(config, theta0)
    click.echo(f"checkpoint: {artifacts.checkpoint}")
    click.echo(f"log: {artifacts.log}")
    if artifacts.basis_id:
        click.echo(f"basis: {artifacts.basis_id}")
    click.echo(f"final rel_err: {artifacts.final_rel_err:.6e}")


@training_bp.cli.command("resume")
@run_options
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@reported_errors
def resume(config_path, overrides, checkpoint_path):
    """
    Continue an interrupted pretrain or transfer run from its checkpoint up
    to iters (pretrain_iters for theta0.ckpt); rewrites the checkpoint and
    extends its log.
    """
    config = load_run_config(config_path, overrides)
    artifacts = experiment.run_resume(config, checkpoint_path)
    click.echo(f"checkpoint: {artifacts.checkpoint}")
    click.echo(f"log: {artifacts.log}")
    click.echo(f"iteration: {artifacts.result.iterations}")
    click.echo(f"final rel_err: {artifacts.final_rel_err:.6e}")
