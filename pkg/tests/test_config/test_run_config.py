"""
Unit tests for run configuration files, overrides and sweep grids
"""

import pytest

from svd_pinns.config.run_config import RunConfig, SweepCell
from svd_pinns.exceptions import ConfigurationError
from svd_pinns.models import OptimizerKind, TrainMode


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# parabolic transfer\n"
        "problem=parabolic\n"
        "dim=3\n"
        "epsilon=0.5\n"
        "width=32\n"
        "mode=svd_transfer   # the default anyway\n"
        "sigma_optimizer=rmsprop\n"
        "sigma_lr=0.01\n"
    )
    return str(path)


class TestDefaults:

    def test_defaults(self):
        config = RunConfig()
        assert config.width == 64
        assert config.iters == 5000 and config.pretrain_iters == 5000
        assert config.main_lr == 1e-3
        assert config.mode is TrainMode.SVD_TRANSFER
        assert config.sigma_optimizer is OptimizerKind.GD
        assert config.d_in == 3 and config.out_dim == 1

    def test_enum_values_normalized(self):
        config = RunConfig(mode="frozen_w1", sigma_optimizer="adam")
        assert config.mode is TrainMode.FROZEN_W1
        assert config.sigma_optimizer is OptimizerKind.ADAM

    def test_invalid_values_listed_together(self):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig(width=0, nu=-1.0, problem="heat")
        assert excinfo.value.keys == ["nu", "problem", "width"]


class TestFromFile:

    def test_reads_key_value_file(self, config_file):
        config = RunConfig.from_file(config_file)
        assert config.dim == 3
        assert config.epsilon == 0.5
        assert config.sigma_optimizer is OptimizerKind.RMSPROP
        assert config.sigma_lr == 0.01

    def test_overrides_win(self, config_file):
        config = RunConfig.from_file(config_file, ["width=16", "mode=frozen_w1"])
        assert config.width == 16
        assert config.mode is TrainMode.FROZEN_W1

    def test_output_root_used_when_unset(self, tmp_path):
        config = RunConfig.from_file(None, [], output_root=str(tmp_path))
        assert config.output_dir == str(tmp_path)

    def test_unknown_and_bad_keys(self, config_file):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig.from_file(config_file, ["widht=16", "dim=two", "mode=fast"])
        assert excinfo.value.keys == ["dim", "mode", "widht"]
        assert "offending keys" in str(excinfo.value)

    def test_malformed_override(self):
        with pytest.raises(ConfigurationError):
            RunConfig.from_file(None, ["width"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig.from_file(str(tmp_path / "absent.cfg"))
        assert excinfo.value.keys == ["config"]

    def test_sigma_keys_ignored_for_dense_modes(self, caplog):
        RunConfig.from_file(None, ["mode=frozen_w1", "sigma_lr=0.5"])
        assert "only affect svd_transfer" in caplog.text

    def test_dict_round_trip(self, config_file):
        config = RunConfig.from_file(config_file, ["sweep_cells=svd_transfer:gd:0.1,frozen_w1"])
        assert RunConfig.from_dict(config.as_dict()) == config


class TestStructuralHash:

    def test_depends_on_shapes_only(self):
        base = RunConfig()
        assert base.structural_hash() == base.with_overrides(epsilon=2.0, seed=5, mode="full").structural_hash()
        assert base.structural_hash() != base.with_overrides(width=32).structural_hash()
        assert base.structural_hash() != base.with_overrides(dim=3).structural_hash()
        assert len(base.structural_hash()) == 16


class TestSweepGrid:

    def test_explicit_cells(self):
        config = RunConfig.from_file(
            None,
            [
                "sweep_cells=svd_transfer:gd:0.1,svd_transfer:rmsprop:0.01,svd_transfer:adam:0.001,frozen_w1",
                "sweep_epsilons=0.5",
            ],
        )
        cells = config.sweep_grid()
        assert len(cells) == 4
        assert cells[-1] == SweepCell(TrainMode.FROZEN_W1, OptimizerKind.GD, 0.0, 0.5)
        assert [cell.name for cell in cells][:2] == [
            "svd_transfer-gd-lr0.1-eps0.5",
            "svd_transfer-rmsprop-lr0.01-eps0.5",
        ]

    def test_cross_product(self):
        config = RunConfig(
            sweep_modes=(TrainMode.SVD_TRANSFER, TrainMode.FROZEN_W1),
            sweep_sigma_optimizers=(OptimizerKind.GD, OptimizerKind.ADAM),
            sweep_sigma_lrs=(0.1, 0.01),
            sweep_epsilons=(0.5, 2.0),
        )
        cells = config.sweep_grid()
        # (2 optimizers x 2 rates + 1 frozen cell) per epsilon
        assert len(cells) == 10
        frozen = [cell for cell in cells if cell.mode is TrainMode.FROZEN_W1]
        assert all(cell.sigma_lr == 0.0 for cell in frozen)

    def test_preset_epsilons(self):
        cells = RunConfig(problem="allen_cahn").sweep_grid()
        assert [cell.epsilon for cell in cells] == [0.5, 2.0, 50.0]

    def test_duplicates_removed(self):
        config = RunConfig(sweep_modes=(TrainMode.FULL, TrainMode.FULL), sweep_epsilons=(0.5,))
        assert len(config.sweep_grid()) == 1

    def test_main_learning_rates_expand_full_cells(self):
        config = RunConfig.from_file(
            None,
            [
                "sweep_modes=full,frozen_w1,svd_transfer",
                "sweep_main_lrs=1e-2,1e-3,1e-4",
                "sweep_sigma_lrs=0.1",
                "sweep_epsilons=0.5",
            ],
        )
        cells = config.sweep_grid()
        full = [cell for cell in cells if cell.mode is TrainMode.FULL]
        assert [cell.main_lr for cell in full] == [1e-2, 1e-3, 1e-4]
        assert len({cell.name for cell in full}) == 3
        assert full[0].name == "full-lr0.01-eps0.5"
        others = [cell for cell in cells if cell.mode is not TrainMode.FULL]
        assert len(others) == 2
        assert all(cell.main_lr is None for cell in others)

    def test_explicit_full_cell_learning_rate(self):
        config = RunConfig.from_file(None, ["sweep_cells=full:0.01,full,frozen_w1", "sweep_epsilons=0.5"])
        assert [cell.main_lr for cell in config.sweep_grid()] == [0.01, None, None]

    @pytest.mark.parametrize(
        "override, key",
        [
            ("sweep_main_lrs=0.01,0", "sweep_main_lrs"),
            ("sweep_cells=full:-1", "sweep_cells"),
            ("sweep_cells=frozen_w1:0.1", "sweep_cells"),
        ],
    )
    def test_bad_main_learning_rates(self, override, key):
        with pytest.raises(ConfigurationError) as excinfo:
            RunConfig.from_file(None, [override])
        assert excinfo.value.keys == [key]

    def test_main_learning_rates_round_trip(self):
        config = RunConfig.from_file(None, ["sweep_main_lrs=1e-2,1e-3", "sweep_cells=full:0.05"])
        assert RunConfig.from_dict(config.as_dict()) == config
