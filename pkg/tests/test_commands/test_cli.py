"""
Tests for the svd-pinns command line
"""

import os

import numpy as np
import pandas as pd
import pytest

from svd_pinns.config.run_config import RunConfig
from svd_pinns.services import evaluation, transfer
from svd_pinns.services.checkpoint_codec import checkpoint_to_params
from svd_pinns.services.pde import make_problem

SMALL_RUN = [
    "width=8",
    "n_interior=32",
    "n_boundary=16",
    "n_initial=16",
    "n_test=64",
    "pretrain_iters=20",
    "iters=20",
    "log_every=5",
    "sigma_head=4",
    "seed=3",
]


def _invoke(runner, command, *overrides, extra=()):
    args = [command]
    for item in SMALL_RUN + list(overrides):
        args += ["--set", item]
    return runner.invoke(args=args + list(extra))


@pytest.fixture
def output_dir(app):
    return app.config["OUTPUT_ROOT"]


@pytest.fixture
def pretrained(runner, output_dir):
    result = _invoke(runner, "pretrain")
    assert result.exit_code == 0, result.output
    return os.path.join(output_dir, "theta0.ckpt")


def _load(app, path):
    with app.app_context():
        storage = app.checkpoint_storage
        return storage.load_checkpoint(os.path.dirname(path), os.path.basename(path))


def _report_lines(output):
    """Lines of the form "name: values", keyed by name."""
    lines = {}
    for line in output.splitlines():
        name, sep, rest = line.partition(": ")
        if sep and name in ("sigma", "drift"):
            lines[name] = rest
    return lines


class TestPretrain:

    def test_writes_checkpoint_and_log(self, runner, output_dir, pretrained):
        assert os.path.isfile(pretrained)
        frame = pd.read_csv(os.path.join(output_dir, "pretrain.csv"))
        assert list(frame.columns) == ["iter", "loss_total", "loss_int", "loss_bc", "loss_ic", "rel_err", "wall_ms"]
        assert frame["iter"].tolist() == [0, 5, 10, 15, 20]

    def test_zero_iterations_store_initialization(self, app, runner, output_dir):
        result = _invoke(runner, "pretrain", "pretrain_iters=0")
        assert result.exit_code == 0, result.output
        checkpoint = _load(app, os.path.join(output_dir, "theta0.ckpt"))
        config = RunConfig(width=8, seed=3)
        expected = transfer.initial_params(make_problem("parabolic", 2, 0.0), config)
        params = checkpoint_to_params(checkpoint, config.structural_hash())
        for name, value in expected.blocks().items():
            assert np.array_equal(params.blocks()[name], value)

    def test_rerun_is_byte_identical(self, runner, output_dir, pretrained):
        with open(pretrained, "rb") as f:
            first = f.read()
        assert _invoke(runner, "pretrain").exit_code == 0
        with open(pretrained, "rb") as f:
            assert f.read() == first

    def test_config_file(self, runner, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# tiny\nproblem=allen_cahn\ndim=1\n")
        result = _invoke(runner, "pretrain", extra=["--config", str(path)])
        assert result.exit_code == 0, result.output
        assert "final rel_err" in result.output

    def test_invalid_key_is_usage_error(self, runner):
        result = _invoke(runner, "pretrain", "widht=3", "dim=two")
        assert result.exit_code == 2
        assert "offending keys: dim, widht" in result.output


class TestTransfer:

    def test_svd_transfer_shares_one_basis(self, app, runner, output_dir, pretrained):
        for epsilon in ("0.5", "2"):
            result = _invoke(runner, "transfer", "mode=svd_transfer", f"epsilon={epsilon}")
            assert result.exit_code == 0, result.output
            assert "basis:" in result.output
        names = sorted(os.listdir(output_dir))
        assert names.count("basis.svd") == 1
        assert {"theta_eps0.5.ckpt", "theta_eps2.ckpt", "run_eps0.5.csv", "run_eps2.csv"} <= set(names)

        first = _load(app, os.path.join(output_dir, "theta_eps0.5.ckpt"))
        second = _load(app, os.path.join(output_dir, "theta_eps2.ckpt"))
        assert first.basis_id == second.basis_id
        assert "u" not in first.blocks

        frame = pd.read_csv(os.path.join(output_dir, "run_eps0.5.csv"))
        assert [f"sigma_{k}" for k in range(4)] == list(frame.columns[-4:])
        assert (frame[[f"sigma_{k}" for k in range(4)]] >= 0).all().all()

    def test_frozen_hidden_keeps_hidden_layers(self, app, runner, output_dir, pretrained):
        result = _invoke(runner, "transfer", "mode=frozen_hidden", "epsilon=0.5")
        assert result.exit_code == 0, result.output
        before = _load(app, pretrained).blocks
        after = _load(app, os.path.join(output_dir, "theta_eps0.5.ckpt")).blocks
        for name in ("w0", "b0", "w1", "b1", "b2"):
            assert np.array_equal(before[name], after[name])
        assert not np.array_equal(before["w2"], after["w2"])

    def test_structure_mismatch_is_reported(self, runner, pretrained):
        result = _invoke(runner, "transfer", "width=16", "epsilon=0.5")
        assert result.exit_code == 1
        assert "structure" in result.output

    def test_missing_theta0(self, runner, output_dir):
        result = _invoke(runner, "transfer", "epsilon=0.5")
        assert result.exit_code == 1
        assert "Checkpoint not found" in result.output

    def test_storage_audit(self, app, runner, output_dir):
        """Checkpoint blocks at m = 64, d = 10 match the storage formulas."""
        shape = ["width=64", "dim=10", "pretrain_iters=0", "iters=1", "n_interior=8", "n_boundary=4",
                 "n_initial=4", "n_test=16"]
        assert _invoke(runner, "pretrain", *shape).exit_code == 0
        for mode in ("svd_transfer", "frozen_w1"):
            result = _invoke(runner, "transfer", *shape, f"mode={mode}", "epsilon=0.5",
                             f"output_dir={os.path.join(output_dir, mode)}",
                             extra=["--theta0", os.path.join(output_dir, "theta0.ckpt")])
            assert result.exit_code == 0, result.output

        factored = _load(app, os.path.join(output_dir, "svd_transfer", "theta_eps0.5.ckpt"))
        dense = _load(app, os.path.join(output_dir, "frozen_w1", "theta_eps0.5.ckpt"))
        assert factored.scalar_count() == evaluation.param_count("svd_transfer", 1, 64, 1, 12).per_model
        assert dense.scalar_count() == evaluation.param_count("full", 1, 64, 1, 12).per_model
        assert os.path.getsize(os.path.join(output_dir, "svd_transfer", "theta_eps0.5.ckpt")) < os.path.getsize(
            os.path.join(output_dir, "frozen_w1", "theta_eps0.5.ckpt")
        )
        basis = os.path.join(output_dir, "svd_transfer", "basis.svd")
        assert _load(app, basis).scalar_count() == 2 * 64 * 64 + 64


class TestResume:

    @pytest.mark.parametrize("mode", ["svd_transfer", "full"])
    def test_resumed_transfer_matches_uninterrupted(self, app, runner, output_dir, pretrained, mode):
        straight, resumed = os.path.join(output_dir, "straight"), os.path.join(output_dir, "resumed")
        for run_dir, iters in ((straight, 20), (resumed, 12)):
            result = _invoke(runner, "transfer", f"mode={mode}", "epsilon=0.5", f"iters={iters}",
                             f"output_dir={run_dir}", extra=["--theta0", pretrained])
            assert result.exit_code == 0, result.output

        checkpoint = os.path.join(resumed, "theta_eps0.5.ckpt")
        result = _invoke(runner, "resume", "seed=99", extra=["--checkpoint", checkpoint])
        assert result.exit_code == 0, result.output
        assert "iteration: 20" in result.output

        expected = _load(app, os.path.join(straight, "theta_eps0.5.ckpt"))
        actual = _load(app, checkpoint)
        assert actual.iteration == expected.iteration == 20
        assert actual.basis_id == expected.basis_id
        assert set(actual.blocks) == set(expected.blocks)
        for name, value in expected.blocks.items():
            np.testing.assert_allclose(actual.blocks[name], value, rtol=1e-10, atol=1e-14, err_msg=name)

        expected_log = pd.read_csv(os.path.join(straight, "run_eps0.5.csv"))
        actual_log = pd.read_csv(os.path.join(resumed, "run_eps0.5.csv"))
        assert actual_log["iter"].tolist() == expected_log["iter"].tolist() == [0, 5, 10, 15, 20]
        np.testing.assert_allclose(actual_log["rel_err"], expected_log["rel_err"], rtol=1e-10)
        assert list(actual_log.columns) == list(expected_log.columns)

    def test_resumed_pretrain_matches_uninterrupted(self, app, runner, output_dir, pretrained):
        short = os.path.join(output_dir, "short")
        assert _invoke(runner, "pretrain", "pretrain_iters=8", f"output_dir={short}").exit_code == 0
        result = _invoke(runner, "resume", extra=["--checkpoint", os.path.join(short, "theta0.ckpt")])
        assert result.exit_code == 0, result.output

        expected = _load(app, pretrained)
        actual = _load(app, os.path.join(short, "theta0.ckpt"))
        assert actual.kind == "pretrain"
        assert actual.rng_state == expected.rng_state
        for name, value in expected.blocks.items():
            np.testing.assert_allclose(actual.blocks[name], value, rtol=1e-10, atol=1e-14, err_msg=name)
        log = pd.read_csv(os.path.join(short, "pretrain.csv"))
        assert log["iter"].tolist() == [0, 5, 10, 15, 20]

    def test_finished_run_is_usage_error(self, runner, pretrained):
        result = _invoke(runner, "resume", extra=["--checkpoint", pretrained])
        assert result.exit_code == 2
        assert "offending keys: pretrain_iters" in result.output

    def test_structure_mismatch(self, runner, pretrained):
        result = _invoke(runner, "resume", "width=16", "pretrain_iters=40", extra=["--checkpoint", pretrained])
        assert result.exit_code == 1
        assert "structure" in result.output


class TestSweep:

    def test_sweep_writes_summary(self, runner, output_dir):
        result = _invoke(
            runner,
            "sweep",
            "sweep_cells=svd_transfer:gd:0.1,svd_transfer:rmsprop:0.01,svd_transfer:adam:0.001,frozen_w1",
            "sweep_epsilons=0.5",
        )
        assert result.exit_code == 0, result.output
        summary = pd.read_csv(os.path.join(output_dir, "summary.csv"))
        assert len(summary) == 4
        assert (summary["status"] == "success").all()
        assert (summary["best_rel_err"] <= summary["final_rel_err"]).all()
        assert os.path.isfile(os.path.join(output_dir, "svd_transfer-gd-lr0.1-eps0.5", "theta_eps0.5.ckpt"))
        assert sum(1 for line in result.output.splitlines() if ": final " in line) == 4


class TestEvaluate:

    def test_evaluate_matches_run_log(self, runner, output_dir, pretrained):
        assert _invoke(runner, "transfer", "mode=frozen_w1", "epsilon=0.5").exit_code == 0
        checkpoint = os.path.join(output_dir, "theta_eps0.5.ckpt")
        result = runner.invoke(args=["evaluate", "--checkpoint", checkpoint])
        assert result.exit_code == 0, result.output
        assert "rel_err=" in result.output

        evaluations = pd.read_csv(os.path.join(output_dir, "evaluations.csv"))
        log = pd.read_csv(os.path.join(output_dir, "run_eps0.5.csv"))
        assert evaluations["rel_err"].iloc[0] == pytest.approx(log["rel_err"].iloc[-1], rel=1e-12)
        assert evaluations["iteration"].iloc[0] == 20

    def test_evaluate_other_test_set(self, runner, output_dir, pretrained):
        result = runner.invoke(args=["evaluate", "--checkpoint", pretrained, "--seed", "11", "--n-test", "32"])
        assert result.exit_code == 0, result.output
        assert "n_points=32" in result.output

    def test_missing_checkpoint(self, runner, output_dir):
        result = runner.invoke(args=["evaluate", "--checkpoint", os.path.join(output_dir, "nope.ckpt")])
        assert result.exit_code == 1


class TestParamCount:

    def test_formulas(self, runner):
        result = runner.invoke(args=["param-count", "--n-pdes", "10", "--width", "100", "--d-in", "11"])
        assert result.exit_code == 0, result.output
        assert "standard: total=113010" in result.output
        assert "svd: total=34010" in result.output

    def test_stored_counts(self, runner, pretrained):
        result = runner.invoke(args=["param-count", "--width", "8", "--d-in", "4", "--checkpoint", pretrained])
        assert result.exit_code == 0, result.output
        standard = evaluation.param_count("full", 1, 8, 1, 4).per_model
        assert f"standard: total={standard}" in result.output
        assert f"stored: per_model={standard} shared=0" in result.output

    def test_d_taken_from_checkpoint(self, runner, pretrained):
        """Without --d-in the formulas use the checkpoint's input width plus one."""
        result = runner.invoke(args=["param-count", "--width", "8", "--checkpoint", pretrained])
        assert result.exit_code == 0, result.output
        standard = evaluation.param_count("full", 1, 8, 1, 4).per_model
        assert "formula: d=4" in result.output
        assert f"stored: per_model={standard} shared=0" in result.output
        assert "note:" not in result.output

    def test_input_width_passed_as_d_is_flagged(self, runner, pretrained):
        result = runner.invoke(args=["param-count", "--width", "8", "--d-in", "3", "--checkpoint", pretrained])
        assert result.exit_code == 0, result.output
        assert "matches --d-in 4" in result.output

    def test_d_or_checkpoint_required(self, runner):
        result = runner.invoke(args=["param-count", "--width", "8"])
        assert result.exit_code == 2
        assert "offending keys: d_in" in result.output


class TestSigmaReport:

    def test_drift_against_basis(self, runner, output_dir, pretrained):
        assert _invoke(runner, "transfer", "mode=svd_transfer", "epsilon=0.5").exit_code == 0
        result = runner.invoke(
            args=["sigma-report", "--checkpoint", os.path.join(output_dir, "theta_eps0.5.ckpt"), "--top", "3"]
        )
        assert result.exit_code == 0, result.output
        lines = _report_lines(result.output)
        assert len(lines["sigma"].split()) == 3
        assert "drift" in lines

    def test_dense_checkpoint(self, app, runner, pretrained):
        result = runner.invoke(args=["sigma-report", "--checkpoint", pretrained])
        assert result.exit_code == 0, result.output
        with app.app_context():
            params = app.checkpoint_storage.load_params(os.path.dirname(pretrained), "theta0.ckpt")
        expected = evaluation.singular_values(params)[0]
        assert f"{expected:.6e}" in result.output
        assert "drift" not in _report_lines(result.output)
