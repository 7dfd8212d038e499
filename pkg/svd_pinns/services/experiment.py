"""
End-to-end runs: pretrain → theta0.ckpt, transfer → theta_eps<ε>.ckpt, each
with its CSV log, all written through the application's storage service.
"""

import os
from dataclasses import dataclass
from typing import Any, Dict, Optional

from flask import current_app

from svd_pinns.config.run_config import RunConfig
from svd_pinns.models import NetworkParams, TrainMode
from svd_pinns.services import network, transfer
from svd_pinns.services.checkpoint_codec import optimizers_from_checkpoint, params_to_checkpoint
from svd_pinns.services.pde import PdeProblem, make_problem

THETA0_FILE = "theta0.ckpt"
PRETRAIN_LOG = "pretrain.csv"

# run values a checkpoint records that fix which points a resumed run sees
RESUMED_KEYS = ("seed", "epsilon", "nu", "n_test", "n_interior", "n_boundary", "n_initial", "resample_every")


def checkpoint_name(epsilon: float) -> str:
    return f"theta_eps{epsilon:g}.ckpt"


def log_name(epsilon: float) -> str:
    return f"run_eps{epsilon:g}.csv"


def problem_for(config: RunConfig, epsilon: Optional[float] = None) -> PdeProblem:
    return make_problem(config.problem, config.dim, config.epsilon if epsilon is None else epsilon)


def _extra(config: RunConfig, epsilon: float) -> Dict[str, Any]:
    return {
        "problem": config.problem,
        "dim": config.dim,
        "width": config.width,
        "epsilon": epsilon,
        "seed": config.seed,
        "nu": config.nu,
        "n_test": config.n_test,
        "n_interior": config.n_interior,
        "n_boundary": config.n_boundary,
        "n_initial": config.n_initial,
        "resample_every": config.resample_every,
    }


@dataclass
class RunArtifacts:
    checkpoint: str
    log: str
    result: transfer.TrainingResult
    basis_id: Optional[str] = None

    @property
    def final_rel_err(self) -> float:
        return self.result.records[-1].relative_error

    @property
    def best_rel_err(self) -> float:
        return min(record.relative_error for record in self.result.records)


def run_pretrain(config: RunConfig) -> RunArtifacts:
    """Pretrain at epsilon = 0 and write theta0.ckpt and pretrain.csv into output_dir."""
    storage = current_app.checkpoint_storage
    problem = problem_for(config, 0.0)
    result = transfer.pretrain(problem, config)
    checkpoint = params_to_checkpoint(
        result.params,
        config.structural_hash(),
        kind="pretrain",
        iteration=result.iterations,
        mode=TrainMode.FULL.value,
        optimizers=result.optimizers,
        rng_state=result.rng_state,
        extra=_extra(config, 0.0),
    )
    key = storage.save_checkpoint(config.output_dir, THETA0_FILE, checkpoint)
    log = current_app.run_logs.write_records(config.output_dir, PRETRAIN_LOG, result.records)
    return RunArtifacts(checkpoint=key, log=log, result=result)


def load_theta0(config: RunConfig, theta0_path: Optional[str] = None) -> NetworkParams:
    """theta0 from ``theta0_path`` (default: output_dir/theta0.ckpt), checked against the config structure."""
    path = theta0_path or os.path.join(config.output_dir, THETA0_FILE)
    return current_app.checkpoint_storage.load_params(
        os.path.dirname(path) or ".", os.path.basename(path), expected_hash=config.structural_hash()
    )


def run_transfer(
    config: RunConfig,
    theta0: NetworkParams,
    run_dir: Optional[str] = None,
    basis_dir: Optional[str] = None,
) -> RunArtifacts:
    """
    Transfer theta0 to config.epsilon in config.mode.

    SvdTransfer runs share one basis archive in ``basis_dir`` (default: the
    run directory); their checkpoints store sigma and the basis id only.
    """
    storage = current_app.checkpoint_storage
    run_dir = run_dir or config.output_dir
    basis_dir = basis_dir or run_dir
    problem = problem_for(config)
    mode = config.mode

    basis_id = None
    start = theta0
    if mode.uses_sigma:
        start = network.svd_split(theta0)
        basis_id = storage.save_basis(basis_dir, start, config.structural_hash())

    result = transfer.transfer_train(start, mode, problem, config)
    extra = _extra(config, config.epsilon)
    if basis_dir != run_dir:
        extra["basis_dir"] = basis_dir
    checkpoint = params_to_checkpoint(
        result.params,
        config.structural_hash(),
        kind="transfer",
        iteration=result.iterations,
        mode=mode.value,
        basis_id=basis_id,
        optimizers=result.optimizers,
        extra=extra,
    )
    key = storage.save_checkpoint(run_dir, checkpoint_name(config.epsilon), checkpoint)
    log = current_app.run_logs.write_records(
        run_dir, log_name(config.epsilon), result.records, sigma_head=config.sigma_head
    )
    return RunArtifacts(checkpoint=key, log=log, result=result, basis_id=basis_id)


def run_resume(config: RunConfig, checkpoint_path: str) -> RunArtifacts:
    """
    Continue the run that wrote ``checkpoint_path`` up to config.iters
    (config.pretrain_iters for theta0.ckpt), then rewrite its checkpoint and
    extend its CSV log.

    Seed, epsilon, nu, batch sizes and the resampling period come from the
    checkpoint; the mode and the optimizer states too. The config supplies
    the iteration target and logging settings.
    """
    storage = current_app.checkpoint_storage
    run_dir, name = os.path.dirname(checkpoint_path) or ".", os.path.basename(checkpoint_path)
    checkpoint = storage.load_checkpoint(run_dir, name)
    recorded = {key: checkpoint.extra[key] for key in RESUMED_KEYS if key in checkpoint.extra}
    mode = TrainMode(checkpoint.mode or TrainMode.FULL.value)
    config = config.with_overrides(mode=mode, **recorded)
    params = storage.load_params(run_dir, name, expected_hash=config.structural_hash())

    if checkpoint.kind == "pretrain":
        phase, problem, log, sigma_head = "pretrain", problem_for(config, 0.0), PRETRAIN_LOG, 0
    else:
        phase, problem, log, sigma_head = "transfer", problem_for(config), log_name(config.epsilon), config.sigma_head

    result = transfer.resume_training(
        params, mode, problem, config, optimizers_from_checkpoint(checkpoint), checkpoint.iteration, phase
    )
    resumed = params_to_checkpoint(
        result.params,
        config.structural_hash(),
        kind=checkpoint.kind,
        iteration=result.iterations,
        mode=mode.value,
        basis_id=checkpoint.basis_id,
        optimizers=result.optimizers,
        rng_state=checkpoint.rng_state,
        extra={**checkpoint.extra, **_extra(config, problem.epsilon)},
    )
    key = storage.save_checkpoint(run_dir, name, resumed)
    log_key = current_app.run_logs.extend_records(
        run_dir, log, result.records, checkpoint.iteration, sigma_head=sigma_head
    )
    return RunArtifacts(checkpoint=key, log=log_key, result=result, basis_id=checkpoint.basis_id)
