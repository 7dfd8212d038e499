"""
Binary checkpoint format.

    magic      8 bytes   b"SVDPINN1"
    version    uint32
    meta_len   uint32, followed by UTF-8 JSON metadata (sorted keys)
    n_blocks   uint32
    per block, in sorted name order:
        name_len uint16, name (UTF-8)
        ndim     uint8, shape as ndim × uint32
        data     little-endian float64, C order

All integers are little-endian. Encoding is deterministic, so
decode → encode reproduces the input bytes exactly.
"""

import hashlib
import json
import struct
from typing import Dict, Optional

import numpy as np

from svd_pinns.exceptions import CheckpointError, DimensionError, NumericError
from svd_pinns.models import Checkpoint, DenseHidden, FactoredHidden, NetworkParams
from svd_pinns.models.checkpoint import FORMAT_VERSION
from svd_pinns.services.optim import OptimizerState

MAGIC = b"SVDPINN1"
BASIS_KIND = "basis"
LAYER_BLOCKS = ("w0", "b0", "b1", "w2", "b2")


def encode(checkpoint: Checkpoint) -> bytes:
    meta = json.dumps(checkpoint.metadata(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MAGIC, struct.pack("<I", checkpoint.version), struct.pack("<I", len(meta)), meta]
    parts.append(struct.pack("<I", len(checkpoint.blocks)))
    for name in sorted(checkpoint.blocks):
        value = np.ascontiguousarray(checkpoint.blocks[name], dtype="<f8")
        encoded_name = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded_name)))
        parts.append(encoded_name)
        parts.append(struct.pack("<B", value.ndim))
        parts.append(struct.pack(f"<{value.ndim}I", *value.shape))
        parts.append(value.tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.payload):
            raise CheckpointError(
                f"checkpoint truncated at byte {self.offset} (needed {size} more bytes)"
            )
        chunk = self.payload[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode(payload: bytes) -> Checkpoint:
    """
    Parse checkpoint bytes.

    Raises:
        CheckpointError: bad magic, unsupported version or truncated data
    """
    reader = _Reader(payload)
    if reader.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)")
    (version,) = reader.unpack("<I")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}, expected {FORMAT_VERSION}")
    (meta_len,) = reader.unpack("<I")
    try:
        meta = json.loads(reader.take(meta_len).decode("utf-8"))
    except ValueError as e:
        raise CheckpointError(f"unreadable checkpoint metadata: {e}")
    (count,) = reader.unpack("<I")
    blocks = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I")
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(reader.take(8 * size), dtype="<f8")
        blocks[name] = data.astype(np.float64).reshape(shape)
    if reader.offset != len(payload):
        raise CheckpointError(f"{len(payload) - reader.offset} trailing bytes after the last block")
    try:
        return Checkpoint(
            kind=meta["kind"],
            config_hash=meta["config_hash"],
            iteration=int(meta["iteration"]),
            blocks=blocks,
            mode=meta.get("mode"),
            basis_id=meta.get("basis_id"),
            optimizers=meta.get("optimizers") or {},
            rng_state=meta.get("rng_state"),
            extra=meta.get("extra") or {},
            version=version,
        )
    except KeyError as e:
        raise CheckpointError(f"checkpoint metadata misses {e}")


def content_id(payload: bytes) -> str:
    """Identifier of an encoded archive: first 16 hex digits of its SHA-256."""
    return hashlib.sha256(payload).hexdigest()[:16]


def make_basis(params: NetworkParams, config_hash: str) -> Checkpoint:
    """Basis archive holding the frozen singular vectors and the pretrained sigma."""
    if not params.is_factored:
        raise CheckpointError("basis archive needs factored parameters; run svd_split first")
    hidden = params.hidden
    return Checkpoint(
        kind=BASIS_KIND,
        config_hash=config_hash,
        blocks={"u": hidden.u, "v": hidden.v, "sigma0": hidden.sigma},
    )


def params_to_checkpoint(
    params: NetworkParams,
    config_hash: str,
    kind: str,
    iteration: int = 0,
    mode: Optional[str] = None,
    basis_id: Optional[str] = None,
    optimizers: Optional[Dict[str, OptimizerState]] = None,
    rng_state=None,
    extra=None,
) -> Checkpoint:
    """
    Checkpoint for ``params``. Factored parameters store sigma and point at
    a basis archive by ``basis_id`` instead of carrying u and v.
    """
    blocks = {name: params.blocks()[name] for name in LAYER_BLOCKS}
    if params.is_factored:
        if not basis_id:
            raise CheckpointError("factored checkpoints must reference a basis archive")
        blocks["sigma"] = params.hidden.sigma
    else:
        blocks["w1"] = params.hidden.w1
        basis_id = None
    metadata = {}
    for group, state in (optimizers or {}).items():
        metadata[group] = state.hyperparams()
        blocks.update(state.moment_blocks(group))
    return Checkpoint(
        kind=kind,
        config_hash=config_hash,
        iteration=iteration,
        blocks=blocks,
        mode=mode,
        basis_id=basis_id,
        optimizers=metadata,
        rng_state=rng_state,
        extra=dict(extra or {}),
    )


def checkpoint_to_params(
    checkpoint: Checkpoint,
    expected_hash: Optional[str] = None,
    basis: Optional[Checkpoint] = None,
) -> NetworkParams:
    """
    Rebuild parameters, refusing checkpoints from another structure.

    Raises:
        CheckpointError: structural hash differs, blocks are missing or
            mis-shaped, or a factored checkpoint comes without its basis
    """
    if expected_hash is not None and checkpoint.config_hash != expected_hash:
        raise CheckpointError(
            f"checkpoint was written for structure {checkpoint.config_hash}, "
            f"this run expects {expected_hash}"
        )
    blocks = checkpoint.parameter_blocks()
    missing = [name for name in LAYER_BLOCKS if name not in blocks]
    if "w1" not in blocks and "sigma" not in blocks:
        missing.append("w1|sigma")
    if missing:
        raise CheckpointError(f"checkpoint misses parameter blocks {missing}")
    try:
        if "sigma" in blocks:
            if basis is None:
                raise CheckpointError(
                    f"checkpoint references basis {checkpoint.basis_id} but no basis archive was given"
                )
            if basis.config_hash != checkpoint.config_hash:
                raise CheckpointError(
                    f"basis archive structure {basis.config_hash} does not match checkpoint "
                    f"structure {checkpoint.config_hash}"
                )
            hidden = FactoredHidden(basis.blocks["u"], basis.blocks["v"], blocks["sigma"])
        else:
            hidden = DenseHidden(blocks["w1"])
        return NetworkParams(
            w0=blocks["w0"], b0=blocks["b0"], hidden=hidden, b1=blocks["b1"], w2=blocks["w2"], b2=blocks["b2"]
        )
    except (DimensionError, NumericError, KeyError) as e:
        raise CheckpointError(f"checkpoint blocks do not fit together: {e}")


def optimizers_from_checkpoint(checkpoint: Checkpoint) -> Dict[str, OptimizerState]:
    return {
        group: OptimizerState.restore(hyperparams, checkpoint.blocks, group)
        for group, hyperparams in checkpoint.optimizers.items()
    }
