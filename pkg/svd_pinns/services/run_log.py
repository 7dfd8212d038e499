"""
CSV run logs. Column sets are fixed so plotting scripts can rely on them;
every file starts with a header row.
"""

import io
from typing import Dict, Iterable, List, Optional

import pandas as pd
from flask import current_app

from svd_pinns.models import ErrorReport, RunRecord

RUN_COLUMNS = ["iter", "loss_total", "loss_int", "loss_bc", "loss_ic", "rel_err", "wall_ms"]
SUMMARY_COLUMNS = [
    "cell",
    "mode",
    "sigma_optimizer",
    "sigma_lr",
    "main_lr",
    "epsilon",
    "status",
    "final_rel_err",
    "best_rel_err",
    "message",
]
EVALUATION_COLUMNS = ["checkpoint", "problem", "epsilon", "iteration", "n_points", "rel_err"]

SUMMARY_FILE = "summary.csv"
EVALUATIONS_FILE = "evaluations.csv"


def run_columns(sigma_head: int = 0) -> List[str]:
    return RUN_COLUMNS + [f"sigma_{k}" for k in range(sigma_head)]


def records_frame(records: Iterable[RunRecord], sigma_head: int = 0) -> pd.DataFrame:
    rows = [record.as_row(sigma_head) for record in records]
    frame = pd.DataFrame(rows, columns=run_columns(sigma_head))
    return frame.astype({"iter": "int64"})


def _to_csv(frame: pd.DataFrame) -> bytes:
    return frame.to_csv(index=False).encode("utf-8")


class RunLogService:
    """Writes run, sweep and evaluation tables through the checkpoint storage."""

    @property
    def storage(self):
        return current_app.checkpoint_storage

    def write_records(self, run_dir: str, name: str, records: Iterable[RunRecord], sigma_head: int = 0) -> str:
        frame = records_frame(records, sigma_head)
        key = self.storage.write_bytes(run_dir, name, _to_csv(frame))
        current_app.logger.info(f"Wrote {len(frame)} log rows to {key}")
        return key

    def extend_records(
        self, run_dir: str, name: str, records: Iterable[RunRecord], first_iteration: int, sigma_head: int = 0
    ) -> str:
        """
        Replace the rows from ``first_iteration`` on with ``records`` of a
        resumed run. Earlier rows are kept and the new wall times continue
        from the last kept one.
        """
        frame = records_frame(records, sigma_head)
        existing = self.read(run_dir, name)
        if existing is not None and len(existing):
            offset = existing.loc[existing["iter"] <= first_iteration, "wall_ms"].max()
            frame["wall_ms"] += 0.0 if pd.isna(offset) else offset
            kept = existing[existing["iter"] < first_iteration].reindex(columns=frame.columns)
            frame = pd.concat([kept, frame], ignore_index=True).astype({"iter": "int64"})
        key = self.storage.write_bytes(run_dir, name, _to_csv(frame))
        current_app.logger.info(f"Extended {key} from iteration {first_iteration}: {len(frame)} rows")
        return key

    def read(self, run_dir: str, name: str) -> Optional[pd.DataFrame]:
        payload = self.storage.read_bytes(run_dir, name)
        if payload is None:
            return None
        return pd.read_csv(io.BytesIO(payload))

    def write_summary(self, run_dir: str, rows: List[Dict]) -> str:
        frame = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
        return self.storage.write_bytes(run_dir, SUMMARY_FILE, _to_csv(frame))

    def append_evaluation(self, run_dir: str, checkpoint: str, report: ErrorReport) -> str:
        row = pd.DataFrame(
            [
                {
                    "checkpoint": checkpoint,
                    "problem": report.problem,
                    "epsilon": report.epsilon,
                    "iteration": report.iteration,
                    "n_points": report.n_points,
                    "rel_err": report.relative_error,
                }
            ],
            columns=EVALUATION_COLUMNS,
        )
        existing = self.read(run_dir, EVALUATIONS_FILE)
        frame = row if existing is None else pd.concat([existing, row], ignore_index=True)
        return self.storage.write_bytes(run_dir, EVALUATIONS_FILE, _to_csv(frame))
