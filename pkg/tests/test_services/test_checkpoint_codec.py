"""
Unit tests for the binary checkpoint format
"""

import struct

import numpy as np
import pytest

from svd_pinns.exceptions import CheckpointError
from svd_pinns.models import Checkpoint, OptimizerKind
from svd_pinns.services import checkpoint_codec, network, optim


@pytest.fixture
def optimizers(small_params):
    state = optim.make_optimizer(OptimizerKind.ADAM, 1e-3)
    blocks = {name: value for name, value in small_params.blocks().items()}
    state, _ = optim.step(state, blocks, {name: np.ones_like(value) for name, value in blocks.items()})
    return {"main": state}


@pytest.fixture
def dense_checkpoint(small_params, optimizers):
    return checkpoint_codec.params_to_checkpoint(
        small_params,
        "abc123",
        kind="pretrain",
        iteration=40,
        mode="full",
        optimizers=optimizers,
        extra={"problem": "parabolic", "epsilon": 0.0},
    )


class TestEncoding:

    def test_round_trip_is_byte_identical(self, dense_checkpoint):
        payload = checkpoint_codec.encode(dense_checkpoint)
        again = checkpoint_codec.encode(checkpoint_codec.decode(payload))
        assert again == payload

    def test_decode_restores_fields(self, dense_checkpoint):
        decoded = checkpoint_codec.decode(checkpoint_codec.encode(dense_checkpoint))
        assert decoded.kind == "pretrain"
        assert decoded.iteration == 40
        assert decoded.extra == {"problem": "parabolic", "epsilon": 0.0}
        for name, value in dense_checkpoint.blocks.items():
            assert np.array_equal(decoded.blocks[name], value)

    def test_magic_header(self, dense_checkpoint):
        assert checkpoint_codec.encode(dense_checkpoint).startswith(b"SVDPINN1")

    def test_bad_magic(self, dense_checkpoint):
        payload = checkpoint_codec.encode(dense_checkpoint)
        with pytest.raises(CheckpointError, match="magic"):
            checkpoint_codec.decode(b"NOTACKPT" + payload[8:])

    def test_unsupported_version(self, dense_checkpoint):
        payload = checkpoint_codec.encode(dense_checkpoint)
        with pytest.raises(CheckpointError, match="version"):
            checkpoint_codec.decode(payload[:8] + struct.pack("<I", 99) + payload[12:])

    def test_truncated(self, dense_checkpoint):
        payload = checkpoint_codec.encode(dense_checkpoint)
        with pytest.raises(CheckpointError, match="truncated"):
            checkpoint_codec.decode(payload[:-3])

    def test_trailing_bytes(self, dense_checkpoint):
        payload = checkpoint_codec.encode(dense_checkpoint)
        with pytest.raises(CheckpointError, match="trailing"):
            checkpoint_codec.decode(payload + b"\x00")


class TestParams:

    def test_dense_round_trip(self, small_params, dense_checkpoint):
        params = checkpoint_codec.checkpoint_to_params(dense_checkpoint, expected_hash="abc123")
        for name, value in small_params.blocks().items():
            assert np.array_equal(params.blocks()[name], value)

    def test_structure_mismatch(self, dense_checkpoint):
        with pytest.raises(CheckpointError, match="structure"):
            checkpoint_codec.checkpoint_to_params(dense_checkpoint, expected_hash="other")

    def test_missing_block(self, dense_checkpoint):
        del dense_checkpoint.blocks["b1"]
        with pytest.raises(CheckpointError, match="b1"):
            checkpoint_codec.checkpoint_to_params(dense_checkpoint)

    def test_factored_checkpoint_stores_sigma_only(self, small_params):
        factored = network.svd_split(small_params)
        basis = checkpoint_codec.make_basis(factored, "abc123")
        basis_id = checkpoint_codec.content_id(checkpoint_codec.encode(basis))
        checkpoint = checkpoint_codec.params_to_checkpoint(
            factored, "abc123", kind="transfer", mode="svd_transfer", basis_id=basis_id
        )
        assert "u" not in checkpoint.blocks and "v" not in checkpoint.blocks
        assert checkpoint.blocks["sigma"].shape == (8,)
        assert checkpoint.basis_id == basis_id

        params = checkpoint_codec.checkpoint_to_params(checkpoint, "abc123", basis)
        assert params.is_factored
        assert np.array_equal(params.hidden.u, factored.hidden.u)

    def test_factored_checkpoint_needs_basis(self, small_params):
        factored = network.svd_split(small_params)
        with pytest.raises(CheckpointError):
            checkpoint_codec.params_to_checkpoint(factored, "abc123", kind="transfer")
        checkpoint = checkpoint_codec.params_to_checkpoint(factored, "abc123", kind="transfer", basis_id="f" * 16)
        with pytest.raises(CheckpointError, match="basis"):
            checkpoint_codec.checkpoint_to_params(checkpoint)

    def test_basis_needs_factored_params(self, small_params):
        with pytest.raises(CheckpointError):
            checkpoint_codec.make_basis(small_params, "abc123")

    def test_content_id(self):
        assert len(checkpoint_codec.content_id(b"payload")) == 16
        assert checkpoint_codec.content_id(b"a") != checkpoint_codec.content_id(b"b")


class TestOptimizerState:

    def test_moments_survive_checkpoint(self, dense_checkpoint, optimizers):
        decoded = checkpoint_codec.decode(checkpoint_codec.encode(dense_checkpoint))
        restored = checkpoint_codec.optimizers_from_checkpoint(decoded)
        assert restored["main"].step_count == 1
        for name, value in optimizers["main"].second_moment.items():
            assert np.array_equal(restored["main"].second_moment[name], value)

    def test_moments_are_not_parameter_blocks(self, dense_checkpoint):
        assert all(not name.startswith("opt.") for name in dense_checkpoint.parameter_blocks())
        assert dense_checkpoint.scalar_count() == sum(
            value.size for value in dense_checkpoint.parameter_blocks().values()
        )

    def test_empty_checkpoint_encodes(self):
        checkpoint = Checkpoint(kind="basis", config_hash="x")
        assert checkpoint_codec.decode(checkpoint_codec.encode(checkpoint)).blocks == {}
