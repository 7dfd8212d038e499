"""
Unit tests for the CSV run logs
"""

import numpy as np
import pytest

from svd_pinns.models import ErrorReport, LossReport, RunRecord
from svd_pinns.services import run_log


@pytest.fixture
def records():
    loss = LossReport(interior_term=1.0, boundary_term=0.5, initial_term=0.25, nu=2.0)
    return [
        RunRecord(iteration=0, loss=loss, relative_error=0.9, wall_ms=1.0, sigma=np.array([3.0, 2.0])),
        RunRecord(iteration=10, loss=loss, relative_error=0.5, wall_ms=8.0, sigma=np.array([2.5, 2.1])),
    ]


class TestRecordsFrame:

    def test_columns(self, records):
        frame = run_log.records_frame(records, sigma_head=3)
        assert list(frame.columns) == run_log.RUN_COLUMNS + ["sigma_0", "sigma_1", "sigma_2"]
        assert frame["loss_total"].tolist() == [2.75, 2.75]
        assert np.isnan(frame["sigma_2"][0])

    def test_without_sigma(self, records):
        frame = run_log.records_frame(records)
        assert list(frame.columns) == run_log.RUN_COLUMNS
        assert frame["iter"].dtype == np.int64


class TestRunLogService:

    def test_write_and_read_records(self, app_context, tmp_path, records):
        service = app_context.run_logs
        key = service.write_records(str(tmp_path), "run_eps0.5.csv", records, sigma_head=2)
        with open(key) as f:
            header = f.readline().strip()
        assert header == "iter,loss_total,loss_int,loss_bc,loss_ic,rel_err,wall_ms,sigma_0,sigma_1"

        frame = service.read(str(tmp_path), "run_eps0.5.csv")
        assert frame["rel_err"].tolist() == [0.9, 0.5]
        assert frame["sigma_1"].tolist() == [2.0, 2.1]

    def test_read_missing(self, app_context, tmp_path):
        assert app_context.run_logs.read(str(tmp_path), "missing.csv") is None

    def test_summary_columns(self, app_context, tmp_path):
        rows = [
            {
                "cell": "frozen_w1-eps0.5",
                "mode": "frozen_w1",
                "sigma_optimizer": "gd",
                "sigma_lr": 0.0,
                "epsilon": 0.5,
                "status": "success",
                "final_rel_err": 0.1,
                "best_rel_err": 0.09,
                "message": "",
            }
        ]
        app_context.run_logs.write_summary(str(tmp_path), rows)
        frame = app_context.run_logs.read(str(tmp_path), run_log.SUMMARY_FILE)
        assert list(frame.columns) == run_log.SUMMARY_COLUMNS
        assert len(frame) == 1

    def test_evaluations_accumulate(self, app_context, tmp_path):
        report = ErrorReport(relative_error=0.2, n_points=64, problem="parabolic", epsilon=0.5, iteration=20)
        service = app_context.run_logs
        service.append_evaluation(str(tmp_path), "theta_eps0.5.ckpt", report)
        service.append_evaluation(str(tmp_path), "theta_eps0.5.ckpt", report)
        frame = service.read(str(tmp_path), run_log.EVALUATIONS_FILE)
        assert list(frame.columns) == run_log.EVALUATION_COLUMNS
        assert len(frame) == 2

    def test_extend_replaces_rows_from_resume_point(self, app_context, tmp_path, records):
        service = app_context.run_logs
        service.write_records(str(tmp_path), "run_eps0.5.csv", records, sigma_head=2)
        loss = records[0].loss
        resumed = [
            RunRecord(iteration=15, loss=loss, relative_error=0.4, wall_ms=2.0, sigma=np.array([2.4, 2.2])),
            RunRecord(iteration=20, loss=loss, relative_error=0.3, wall_ms=5.0, sigma=np.array([2.3, 2.2])),
        ]
        service.extend_records(str(tmp_path), "run_eps0.5.csv", resumed, 10, sigma_head=2)
        frame = service.read(str(tmp_path), "run_eps0.5.csv")
        assert frame["iter"].tolist() == [0, 15, 20]
        assert frame["rel_err"].tolist() == [0.9, 0.4, 0.3]
        assert frame["wall_ms"].tolist() == [1.0, 10.0, 13.0]
        assert frame["sigma_0"].tolist() == [3.0, 2.4, 2.3]

    def test_extend_without_existing_log(self, app_context, tmp_path, records):
        service = app_context.run_logs
        service.extend_records(str(tmp_path), "pretrain.csv", records, 0)
        frame = service.read(str(tmp_path), "pretrain.csv")
        assert frame["iter"].tolist() == [0, 10]
        assert frame["wall_ms"].tolist() == [1.0, 8.0]
