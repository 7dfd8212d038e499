"""
This module contains Celery tasks for running sweep cells.
"""

from celery import shared_task
from flask import current_app


@shared_task(bind=True, name="run_sweep_cell")
def run_sweep_cell(self, config_values, cell_values, theta0_path):
    """
    Celery task to transfer theta0 into one sweep cell.

    Args:
        config_values (dict): RunConfig.as_dict() of the sweep
        cell_values (dict): mode, sigma_optimizer, sigma_lr and epsilon of the cell
        theta0_path (str): Storage path of the pretrained checkpoint

    Returns:
        dict: One summary row; ``status`` is "success" or "error"
    """
    from svd_pinns.services.sweep import execute_cell

    try:
        return execute_cell(config_values, cell_values, theta0_path)
    except Exception as e:
        # The sweep keeps going; the failure lands in summary.csv
        current_app.logger.exception(f"Sweep cell {cell_values} crashed")
        return {
            "cell": f"{cell_values.get('mode')}-eps{cell_values.get('epsilon')}",
            **cell_values,
            "status": "error",
            "final_rel_err": None,
            "best_rel_err": None,
            "message": f"{type(e).__name__}: {e}",
        }
