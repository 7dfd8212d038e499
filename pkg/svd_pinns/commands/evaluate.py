import os

import click
from flask import Blueprint, current_app

from svd_pinns.commands.common import reported_errors
from svd_pinns.config.run_config import RunConfig
from svd_pinns.exceptions import ConfigurationError
from svd_pinns.models import TrainMode
from svd_pinns.services import evaluation, sampling
from svd_pinns.services.pde import make_problem

evaluate_bp = Blueprint("evaluate", __name__, cli_group=None)


def _split(path):
    return os.path.dirname(path) or ".", os.path.basename(path)


@evaluate_bp.cli.command("evaluate")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@click.option("--problem", default=None, help="Problem family (default: from the checkpoint).")
@click.option("--dim", type=int, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--seed", type=int, default=None, help="Test-set seed (default: the run seed).")
@click.option("--n-test", "n_test", type=int, default=None)
@reported_errors
def evaluate(checkpoint_path, problem, dim, epsilon, seed, n_test):
    """Relative error of a checkpoint on a seeded test set; appends evaluations.csv."""
    storage = current_app.checkpoint_storage
    run_dir, name = _split(checkpoint_path)
    checkpoint = storage.load_checkpoint(run_dir, name)
    extra = checkpoint.extra

    values = {
        "problem": problem if problem is not None else extra.get("problem"),
        "dim": dim if dim is not None else extra.get("dim"),
        "epsilon": epsilon if epsilon is not None else extra.get("epsilon", 0.0),
        "seed": seed if seed is not None else extra.get("seed", 0),
        "n_test": n_test if n_test is not None else extra.get("n_test", RunConfig.n_test),
        "width": extra.get("width"),
    }
    missing = [key for key, value in values.items() if value is None]
    if missing:
        raise ConfigurationError("Checkpoint does not record these values; pass them as options", missing)
    config = RunConfig(output_dir=run_dir, **values)

    params = storage.load_params(run_dir, name, expected_hash=config.structural_hash())
    pde = make_problem(config.problem, config.dim, config.epsilon)
    report = evaluation.evaluate(params, pde, sampling.draw_test_set(config), checkpoint.iteration)
    current_app.run_logs.append_evaluation(run_dir, name, report)

    click.echo(
        f"{name}: problem={report.problem} epsilon={report.epsilon:g} iteration={report.iteration} "
        f"n_points={report.n_points} rel_err={report.relative_error:.6e}"
    )


@evaluate_bp.cli.command("param-count")
@click.option("--n-pdes", "n_pdes", type=int, default=1, show_default=True)
@click.option("--width", "m", type=int, required=True, help="Hidden width m.")
@click.option("--out-dim", "r", type=int, default=1, show_default=True)
@click.option(
    "--d-in",
    "d_in",
    type=int,
    default=None,
    help="The formulas' d: network input width (dim + 1) plus one, e.g. 12 for dim=10. "
    "Defaults to the checkpoint's input width plus one.",
)
@click.option("--checkpoint", "checkpoint_path", type=click.Path(dir_okay=False), default=None,
              help="Also count the scalars a checkpoint actually stores.")
@reported_errors
def param_count(n_pdes, m, r, d_in, checkpoint_path):
    """Storage of n standard PINNs versus n SVD-PINNs sharing one basis."""
    params = None
    if checkpoint_path:
        run_dir, name = _split(checkpoint_path)
        params = current_app.checkpoint_storage.load_params(run_dir, name)
    if d_in is None:
        if params is None:
            raise ConfigurationError("Pass --d-in or a --checkpoint to take it from", ["d_in"])
        d_in = params.d_in + 1
    standard = evaluation.param_count(TrainMode.FULL, n_pdes, m, r, d_in)
    factored = evaluation.param_count(TrainMode.SVD_TRANSFER, n_pdes, m, r, d_in)
    click.echo(f"formula: d={d_in}")
    click.echo(f"standard: total={standard.total} per_model={standard.per_model}")
    click.echo(f"svd: total={factored.total} per_model={factored.per_model} shared={factored.shared}")
    if params is not None:
        stored = evaluation.stored_param_counts(params)
        click.echo(f"stored: per_model={stored.per_model} shared={stored.shared}")
        if d_in != params.d_in + 1:
            click.echo(f"note: this checkpoint's input width {params.d_in} matches --d-in {params.d_in + 1}")


@evaluate_bp.cli.command("sigma-report")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@click.option("--reference", "reference_path", type=click.Path(dir_okay=False), default=None,
              help="Checkpoint to measure drift against (default: the basis archive's sigma0).")
@click.option("--top", type=int, default=16, show_default=True)
@reported_errors
def sigma_report(checkpoint_path, reference_path, top):
    """Leading singular values of the hidden weight and their drift."""
    storage = current_app.checkpoint_storage
    run_dir, name = _split(checkpoint_path)
    checkpoint = storage.load_checkpoint(run_dir, name)
    params = storage.load_params(run_dir, name)
    sigma = evaluation.singular_values(params)
    click.echo("sigma: " + " ".join(f"{value:.6e}" for value in sigma[:top]))

    reference = None
    if reference_path:
        ref_dir, ref_name = _split(reference_path)
        reference = evaluation.singular_values(storage.load_params(ref_dir, ref_name))
    elif checkpoint.basis_id:
        basis_dir = checkpoint.extra.get("basis_dir", run_dir)
        reference = storage.load_basis(basis_dir, checkpoint.basis_id).blocks["sigma0"]
        # sigma0 is indexed like the trained sigma, not re-sorted
        sigma = params.hidden.sigma
    if reference is not None:
        click.echo(f"drift: {evaluation.sigma_drift(reference, sigma):.6e}")
