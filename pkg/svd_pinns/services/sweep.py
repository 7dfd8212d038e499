"""
Grid sweeps over mode × sigma optimizer × sigma learning rate × epsilon,
with full cells optionally repeated over the main learning rate.

Every cell transfers the same theta0 into its own subdirectory. Cells with
the same epsilon share a seed, so an SvdTransfer cell with sigma_lr = 0 and
a FrozenW1 cell see identical training data and test points. Cells run
through the ``run_sweep_cell`` Celery task, in-process by default.
"""

import os
from typing import Any, Dict, List, Optional

from flask import current_app

from svd_pinns.config.run_config import RunConfig, SweepCell
from svd_pinns.exceptions import SvdPinnsError
from svd_pinns.models import OptimizerKind, TrainMode
from svd_pinns.services import experiment, network
from svd_pinns.utils import make_rng


def cell_seed(base_seed: int, epsilon: float) -> int:
    """Seed shared by every cell of one epsilon."""
    rng = make_rng(base_seed, "sweep-cell", f"{float(epsilon)!r}")
    return int(rng.integers(0, 2**31 - 1))


def cell_config(config: RunConfig, cell: SweepCell) -> RunConfig:
    return config.with_overrides(
        mode=cell.mode,
        sigma_optimizer=cell.sigma_optimizer,
        sigma_lr=cell.sigma_lr,
        main_lr=cell.main_lr if cell.main_lr is not None else config.main_lr,
        epsilon=cell.epsilon,
        seed=cell_seed(config.seed, cell.epsilon),
        output_dir=os.path.join(config.output_dir, cell.name),
        sweep_modes=(),
        sweep_sigma_optimizers=(),
        sweep_sigma_lrs=(),
        sweep_main_lrs=(),
        sweep_epsilons=(),
        sweep_cells=(),
    )


def _cell_dict(cell: SweepCell) -> Dict[str, Any]:
    return {
        "mode": cell.mode.value,
        "sigma_optimizer": cell.sigma_optimizer.value,
        "sigma_lr": cell.sigma_lr,
        "epsilon": cell.epsilon,
        "main_lr": cell.main_lr,
    }


def _cell_from_dict(values: Dict[str, Any]) -> SweepCell:
    return SweepCell(
        mode=TrainMode(values["mode"]),
        sigma_optimizer=OptimizerKind(values["sigma_optimizer"]),
        sigma_lr=float(values["sigma_lr"]),
        epsilon=float(values["epsilon"]),
        main_lr=None if values.get("main_lr") is None else float(values["main_lr"]),
    )


def execute_cell(config_values: Dict[str, Any], cell_values: Dict[str, Any], theta0_path: str) -> Dict[str, Any]:
    """
    Run one cell and report its outcome. Never raises for run failures:
    errors become ``{"status": "error", "message": ...}``.
    """
    config = RunConfig.from_dict(config_values)
    cell = _cell_from_dict(cell_values)
    row = {"cell": cell.name, **_cell_dict(cell)}
    row["main_lr"] = cell.main_lr if cell.main_lr is not None else config.main_lr
    try:
        run_config = cell_config(config, cell)
        theta0 = experiment.load_theta0(config, theta0_path)
        artifacts = experiment.run_transfer(run_config, theta0, basis_dir=config.output_dir)
    except (SvdPinnsError, OSError) as e:
        current_app.logger.error(f"Sweep cell {cell.name} failed: {e}")
        return {**row, "status": "error", "final_rel_err": None, "best_rel_err": None, "message": str(e)}
    return {
        **row,
        "status": "success",
        "final_rel_err": artifacts.final_rel_err,
        "best_rel_err": artifacts.best_rel_err,
        "message": "",
    }


def run_sweep(config: RunConfig, theta0_path: Optional[str] = None) -> List[Dict[str, Any]]:
    """
    Run every grid cell and write summary.csv into ``config.output_dir``.

    theta0 is pretrained first when no checkpoint exists yet.
    """
    from svd_pinns.tasks import run_sweep_cell

    log = current_app.logger
    storage = current_app.checkpoint_storage
    if theta0_path is None:
        theta0_path = os.path.join(config.output_dir, experiment.THETA0_FILE)
        if not storage.exists(config.output_dir, experiment.THETA0_FILE):
            log.info(f"No theta0 in {config.output_dir}; pretraining first")
            experiment.run_pretrain(config)

    cells = config.sweep_grid()
    if any(cell.mode is TrainMode.SVD_TRANSFER for cell in cells):
        # written once up front so parallel cells only read it
        theta0 = experiment.load_theta0(config, theta0_path)
        storage.save_basis(config.output_dir, network.svd_split(theta0), config.structural_hash())

    log.info(f"Sweep over {len(cells)} cells in {config.output_dir}")
    executor = current_app.config.get("SWEEP_EXECUTOR", "local")
    args = [(config.as_dict(), _cell_dict(cell), theta0_path) for cell in cells]
    if executor == "celery":
        pending = [run_sweep_cell.delay(*arg) for arg in args]
        rows = [result.get() for result in pending]
    elif executor == "local":
        rows = [run_sweep_cell.apply(args=arg).get() for arg in args]
    else:
        raise ValueError(f"Unsupported sweep executor: {executor}")

    current_app.run_logs.write_summary(config.output_dir, rows)
    failed = sum(1 for row in rows if row["status"] != "success")
    log.info(f"Sweep finished: {len(rows) - failed} succeeded, {failed} failed")
    return rows
